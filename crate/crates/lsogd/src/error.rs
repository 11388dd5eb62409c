//! Error types shared across the crate.

use thiserror::Error;

/// Configuration validation failures. Each violated constraint gets its own
/// variant so callers (and tests) can tell them apart.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("recent-window fraction must satisfy 0 < R_comp < 1, got {0}")]
    RecentFractionOutOfRange(f64),
    #[error("accuracy-drop threshold must satisfy 0 <= tau_drop <= 1, got {0}")]
    DropThresholdOutOfRange(f64),
    #[error("drift thresholds must satisfy 0 <= theta_mod < theta_high <= 1, got mod={0} high={1}")]
    DriftThresholdsInvalid(f64, f64),
    #[error("learning-rate factor must satisfy k_lr > 1, got {0}")]
    LrFactorNotExpansive(f64),
    #[error("learning-rate bounds must satisfy 0 < eta_min < eta_max, got [{0}, {1}]")]
    EtaBoundsInvalid(f64, f64),
    #[error("fusion gain must satisfy k_alpha > 0, got {0}")]
    FusionGainNotPositive(f64),
    #[error("incremental gain must satisfy k_eta > 0, got {0}")]
    IncrementalGainNotPositive(f64),
    #[error("drift window must satisfy W_drift >= 2, got {0}")]
    DriftWindowTooShort(usize),
    #[error("window split leaves an empty side: W_drift={0}, R_comp={1}")]
    WindowSplitDegenerate(usize, f64),
    #[error("suspicion margin must be >= 0, got {0}")]
    SuspicionMarginNegative(f64),
    #[error("alpha adaptation period must be >= 1")]
    AlphaPeriodZero,
    #[error("controller cost for {0} must be >= 0, got {1}")]
    NegativeCost(&'static str, f64),
    #[error("phase length must be > 0: {0}")]
    PhaseStepsZero(&'static str),
    #[error("batch size must be > 0")]
    BatchSizeZero,
    #[error("initial learning rate {0} outside [eta_min, eta_max] = [{1}, {2}]")]
    Eta0OutOfBounds(f64, f64, f64),
    #[error("metrics window must be >= 1")]
    MetricsWindowZero,
    #[error("feature dimension must be >= 1: {0}")]
    DimensionZero(&'static str),
    #[error("Lyapunov parameter {0} must be strictly positive, got {1}")]
    NonPositiveLyapunovParam(&'static str, f64),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("override {0:?} is not of the form section.key=value")]
    MalformedOverride(String),
}

/// Model-level failures.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("feature dimension mismatch for modality {modality}: state expects {expected}, sample has {actual}")]
    DimensionMismatch {
        modality: u8,
        expected: usize,
        actual: usize,
    },
    #[error("probability {0} outside (0, 1) after clamping")]
    ProbabilityOutOfRange(f64),
    #[error("gradient became non-finite")]
    NonFiniteGradient,
    #[error("empty window")]
    EmptyWindow,
    #[error("empty batch")]
    EmptyBatch,
}

/// Stream / drift-schedule construction failures.
#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("segment start steps must be strictly increasing (segment {0})")]
    NonIncreasingSegments(usize),
    #[error("first segment must start at step 0, got {0}")]
    FirstSegmentNotAtZero(u64),
    #[error("schedule has no segments")]
    NoSegments,
    #[error("per-step concept change {actual} exceeds delta_max {bound} at step {step}")]
    DriftBoundExceeded { step: u64, actual: f64, bound: f64 },
    #[error("noise std dev must be >= 0, got {0}")]
    NegativeNoise(f64),
    #[error("informativeness must lie in [0, 1], got {0}")]
    InformativenessOutOfRange(f64),
    #[error("label noise must lie in [0, 0.5), got {0}")]
    LabelNoiseOutOfRange(f64),
    #[error("severity must lie in (0, 1], got {0}")]
    SeverityOutOfRange(f64),
    #[error("concept weight vectors must have matching dims across segments")]
    ConceptDimMismatch,
    #[error("transition parameter must be >= 1")]
    TransitionLengthZero,
    #[error("incremental step size must be > 0, got {0}")]
    StepSizeNotPositive(f64),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

/// Lyapunov diagnostics failures.
#[derive(Debug, Error, PartialEq)]
pub enum LyapunovError {
    #[error("contraction factor eta*lambda = {0} outside (0, 1)")]
    ContractionOutOfRange(f64),
    #[error("trace of length {len} too short for burn-in {burn_in}")]
    TraceTooShort { len: usize, burn_in: usize },
}

/// Harness-level failures (run orchestration and metrics I/O).
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("first segment is stationary for {available} steps, phase 1 needs {needed}")]
    Phase1NotStationary { available: u64, needed: u64 },
    #[error("no records")]
    NoRecords,
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
