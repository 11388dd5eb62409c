//! Online multimodal learning under concept drift with a feedback
//! controller and Lyapunov diagnostics.
//!
//! The crate simulates a two-modality linear learner whose learning rate
//! and fusion weight are adjusted online by a rule-based controller in
//! response to a drift signal estimated from the accuracy window. A
//! synthetic piecewise-stationary stream injects sudden, gradual,
//! incremental, recurring, and modality-specific drift under an explicit
//! per-step disturbance bound. The `lyapunov` and `verify` modules turn the
//! framework's stability guarantees into runtime-checkable assertions on a
//! scalar reference model.
//!
//! Module map:
//! - [`types`], [`config`], [`rng`], [`record`]: domain types, the TOML
//!   configuration surface, deterministic seeding, and the metrics schema.
//! - [`model`]: the fused linear learner and its gradients.
//! - [`controller`]: drift estimation and the two adaptation rules.
//! - [`stream`]: drift schedules, presets, and the sample generator.
//! - [`lyapunov`]: scalar reference dynamics and stability diagnostics.
//! - [`harness`]: the two-phase experiment protocol and summaries.
//! - [`verify`]: the property suite behind the `verify` CLI subcommand.

pub mod config;
pub mod controller;
pub mod error;
pub mod harness;
pub mod lyapunov;
pub mod model;
pub mod record;
pub mod rng;
pub mod stream;
pub mod types;
pub mod verify;

pub use config::{ControllerConfig, CostTable, HarnessConfig, LrMode, LyapunovConfig, RunConfig, StreamConfig};
pub use controller::{ControllerState, StepDecision};
pub use error::{ConfigError, HarnessError, LyapunovError, ModelError, StreamError};
pub use harness::{compute_metrics, f1_score, Experiment, ExperimentOutcome, MetricsSummary, Phase2Mode, RunResult};
pub use lyapunov::{detect_uub, lemma1_bound, LyapunovParams, ScalarRef, UubReport};
pub use model::{FusionLevel, ModelState};
pub use record::{read_csv, write_csv, ControllerAction, StepRecord, CSV_HEADER};
pub use rng::{derive_rng, seed_rng};
pub use stream::{ConceptSpec, DriftSchedule, Segment, StreamGenerator, Transition, PRESETS};
pub use types::{AlphaMode, FusionWeight, Modality, Sample, Suspect};
pub use verify::{run_suite, Outcome, PropertyReport, SuiteParams};
