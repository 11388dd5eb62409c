//! Configuration: one TOML file with `[controller]`, `[stream]`, `[harness]`
//! and `[lyapunov]` sections. Every key is optional; defaults are the
//! canonical desk-scale setup. `section.key=value` overrides are applied on
//! top of the file before deserialization, so unknown keys are rejected by
//! name no matter where they come from.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::types::AlphaMode;

/// Cost charged per controller action, in arbitrary units. The values are
/// stand-ins for whatever a deployment considers expensive (recompute,
/// risk of change); only their relative size matters to the cost curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostTable {
    pub none: f64,
    pub lr_up: f64,
    pub lr_down: f64,
    pub alpha_shift: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            none: 0.0,
            lr_up: 1.0,
            lr_down: 1.0,
            alpha_shift: 2.0,
        }
    }
}

impl CostTable {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let named = [
            ("none", self.none),
            ("lr_up", self.lr_up),
            ("lr_down", self.lr_down),
            ("alpha_shift", self.alpha_shift),
        ];
        for (name, v) in named {
            if !(v >= 0.0) {
                return Err(ConfigError::NegativeCost(name, v));
            }
        }
        Ok(())
    }
}

/// How the learning rate reacts to the drift signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LrMode {
    /// Multiplicative moves gated by the drift-signal thresholds.
    #[default]
    Threshold,
    /// Additive moves proportional to the change in the error signal.
    Incremental,
}

/// All controller gains, thresholds, windows, and bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// Sliding accuracy-window length, in steps.
    pub w_drift: usize,
    /// Fraction of the window treated as "recent" when estimating drift.
    pub r_comp: f64,
    /// Minimum past-vs-recent accuracy drop that counts as drift.
    pub tau_drop: f64,
    /// Multiplicative learning-rate factor (> 1).
    pub k_lr: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Drift signal above this: severe (learning rate is raised).
    pub theta_high: f64,
    /// Drift signal above this but at most `theta_high`: moderate
    /// (learning rate is lowered).
    pub theta_mod: f64,
    /// Fusion adaptation gain for the analytic (error-gap) rule.
    pub k_alpha: f64,
    /// Fixed raw-parameter step for the sigmoid rule.
    pub alpha_step: f64,
    pub alpha_mode: AlphaMode,
    pub lr_mode: LrMode,
    /// Gain for the incremental learning-rate mode.
    pub k_eta: f64,
    /// Dead zone for modality suspicion: a modality is suspected only when
    /// its estimated error exceeds the other's by more than this margin.
    pub suspicion_margin: f64,
    /// Apply the fusion update every `alpha_period` controller steps.
    pub alpha_period: u64,
    pub cost: CostTable,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            w_drift: 100,
            r_comp: 0.3,
            tau_drop: 0.1,
            k_lr: 1.5,
            eta_min: 1e-7,
            eta_max: 1e-2,
            theta_high: 0.7,
            theta_mod: 0.2,
            k_alpha: 0.05,
            alpha_step: 0.25,
            alpha_mode: AlphaMode::Analytic,
            lr_mode: LrMode::Threshold,
            k_eta: 0.01,
            suspicion_margin: 0.05,
            alpha_period: 1,
            cost: CostTable::default(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.w_drift < 2 {
            return Err(ConfigError::DriftWindowTooShort(self.w_drift));
        }
        if !(self.r_comp > 0.0 && self.r_comp < 1.0) {
            return Err(ConfigError::RecentFractionOutOfRange(self.r_comp));
        }
        let recent = self.recent_len();
        if recent == 0 || recent >= self.w_drift {
            return Err(ConfigError::WindowSplitDegenerate(self.w_drift, self.r_comp));
        }
        if !(self.tau_drop >= 0.0 && self.tau_drop <= 1.0) {
            return Err(ConfigError::DropThresholdOutOfRange(self.tau_drop));
        }
        if !(self.theta_mod >= 0.0 && self.theta_mod < self.theta_high && self.theta_high <= 1.0) {
            return Err(ConfigError::DriftThresholdsInvalid(
                self.theta_mod,
                self.theta_high,
            ));
        }
        if !(self.k_lr > 1.0) {
            return Err(ConfigError::LrFactorNotExpansive(self.k_lr));
        }
        if !(self.eta_min > 0.0 && self.eta_min < self.eta_max) {
            return Err(ConfigError::EtaBoundsInvalid(self.eta_min, self.eta_max));
        }
        if !(self.k_alpha > 0.0) {
            return Err(ConfigError::FusionGainNotPositive(self.k_alpha));
        }
        if !(self.alpha_step > 0.0) {
            return Err(ConfigError::FusionGainNotPositive(self.alpha_step));
        }
        if !(self.k_eta > 0.0) {
            return Err(ConfigError::IncrementalGainNotPositive(self.k_eta));
        }
        if !(self.suspicion_margin >= 0.0) {
            return Err(ConfigError::SuspicionMarginNegative(self.suspicion_margin));
        }
        if self.alpha_period == 0 {
            return Err(ConfigError::AlphaPeriodZero);
        }
        self.cost.validate()
    }

    /// Number of window entries in the "recent" side of the drift split.
    pub fn recent_len(&self) -> usize {
        (self.w_drift as f64 * self.r_comp).floor() as usize
    }
}

/// Synthetic-stream shape: which drift preset to build and its knobs.
/// Stream steps count individual samples; one harness step consumes
/// `batch_size` consecutive stream steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StreamConfig {
    /// One of: stationary, sudden, gradual, incremental, recurring,
    /// unilateral-m1, unilateral-m2, partial-m1.
    pub preset: String,
    pub d1: usize,
    pub d2: usize,
    /// Informativeness degradation for the unilateral/partial presets.
    pub severity: f64,
    /// Stream step of drift onset. Defaults to one third into phase 2.
    pub drift_step: Option<u64>,
    /// Length of a gradual transition, in stream steps.
    pub gradual_len: u64,
    /// Per-step parameter distance for incremental transitions.
    pub incremental_step: f64,
    /// Alternation period for the recurring preset, in stream steps.
    pub period: u64,
    /// Norm of generated ground-truth weight vectors. Labels are a logistic
    /// draw on the concept logit, so this sets the Bayes error of a segment
    /// (roughly 0.55 / scale).
    pub concept_scale: f64,
    pub noise1: f64,
    pub noise2: f64,
    pub label_noise: f64,
    /// Per-step concept-change bound. Computed from the schedule if absent.
    pub delta_max: Option<f64>,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            preset: "stationary".to_string(),
            d1: 8,
            d2: 8,
            severity: 1.0,
            drift_step: None,
            gradual_len: 4800,
            incremental_step: 0.05,
            period: 6400,
            concept_scale: 70.0,
            noise1: 0.0,
            noise2: 0.0,
            label_noise: 0.0,
            delta_max: None,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d1 == 0 {
            return Err(ConfigError::DimensionZero("d1"));
        }
        if self.d2 == 0 {
            return Err(ConfigError::DimensionZero("d2"));
        }
        Ok(())
    }
}

/// Experiment timing, seeding, and feedback options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub phase1_steps: u64,
    pub phase2_steps: u64,
    pub batch_size: usize,
    /// Initial learning rate for both phases.
    pub eta0: f64,
    pub seed: u64,
    /// Sliding window for the reported error signal and summary metrics.
    /// Distinct from the controller's `w_drift` history.
    pub metrics_window: usize,
    /// Steps by which label feedback (controller input and weight updates)
    /// lags predictions. 0 = fully supervised every step.
    pub label_delay: usize,
    /// Pre-fill the controller's accuracy history from the phase-1 tail.
    pub prime_history: bool,
    /// Feed the controller ground-truth drift indicators from the schedule
    /// instead of estimated ones. Debug aid for controller isolation.
    pub oracle_indicators: bool,
    /// Terminal-window length (steps) for summary F1/error comparisons.
    pub terminal_window: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            phase1_steps: 1000,
            phase2_steps: 3000,
            batch_size: 16,
            eta0: 5e-4,
            seed: 42,
            metrics_window: 100,
            label_delay: 0,
            prime_history: false,
            oracle_indicators: false,
            terminal_window: 200,
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self, controller: &ControllerConfig) -> Result<(), ConfigError> {
        if self.phase1_steps == 0 {
            return Err(ConfigError::PhaseStepsZero("phase1_steps"));
        }
        if self.phase2_steps == 0 {
            return Err(ConfigError::PhaseStepsZero("phase2_steps"));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::BatchSizeZero);
        }
        if self.metrics_window == 0 || self.terminal_window == 0 {
            return Err(ConfigError::MetricsWindowZero);
        }
        if !(self.eta0 >= controller.eta_min && self.eta0 <= controller.eta_max) {
            return Err(ConfigError::Eta0OutOfBounds(
                self.eta0,
                controller.eta_min,
                controller.eta_max,
            ));
        }
        Ok(())
    }

    /// Stream steps consumed by phase 1.
    pub fn phase1_samples(&self) -> u64 {
        self.phase1_steps * self.batch_size as u64
    }

    /// Stream steps consumed by phase 2.
    pub fn phase2_samples(&self) -> u64 {
        self.phase2_steps * self.batch_size as u64
    }
}

/// Constants for the scalar-reference Lyapunov diagnostics. The gammas
/// default to the values implied by the scalar model's own dynamics
/// (`gamma1 = lambda`, `gamma2 = 1`, `gamma3 = (1 + lambda^2) / 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovConfig {
    /// Learning efficacy of the scalar reference model.
    pub lambda: f64,
    /// Learning rate used for scalar reference runs.
    pub eta: f64,
    /// Disturbance bound for scalar reference runs.
    pub delta_max: f64,
    /// Persistent modality-error gap for the fusion-convergence checks.
    pub delta_gap: f64,
    /// Coefficient on the fusion-update magnitude in the increment bound.
    pub c_alpha: f64,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub gamma3: Option<f64>,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            lambda: 1.0,
            eta: 0.1,
            delta_max: 0.05,
            delta_gap: 0.6,
            c_alpha: 1.0,
            gamma1: None,
            gamma2: None,
            gamma3: None,
        }
    }
}

impl LyapunovConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let named = [
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("delta_max", self.delta_max),
            ("delta_gap", self.delta_gap),
            ("c_alpha", self.c_alpha),
        ];
        for (name, v) in named {
            if !(v > 0.0) {
                return Err(ConfigError::NonPositiveLyapunovParam(name, v));
            }
        }
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(ConfigError::NonPositiveLyapunovParam(name, v));
                }
            }
        }
        Ok(())
    }
}

/// The whole experiment configuration: the four TOML sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub controller: ControllerConfig,
    pub stream: StreamConfig,
    pub harness: HarnessConfig,
    pub lyapunov: LyapunovConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.controller.validate()?;
        self.stream.validate()?;
        self.harness.validate(&self.controller)?;
        self.lyapunov.validate()
    }

    /// Parses a config from TOML text plus `section.key=value` overrides.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file (or the defaults when `path` is None) and applies
    /// overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| {
                ConfigError::Parse(format!("cannot read config {}: {e}", p.display()))
            })?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    /// Serializes the effective configuration back to TOML. Re-running from
    /// this text reproduces the run byte for byte.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Applies one `section.key=value` override onto a parsed TOML table.
/// The value is parsed as bool, integer, or float when possible, otherwise
/// kept as a string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let malformed = || ConfigError::MalformedOverride(spec.to_string());
    let (path, value) = spec.split_once('=').ok_or_else(malformed)?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.is_empty() || keys.iter().any(|k| k.is_empty()) || value.is_empty() {
        return Err(malformed());
    }
    let mut node = table;
    for key in &keys[..keys.len() - 1] {
        node = node
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(malformed)?;
    }
    node.insert(keys[keys.len() - 1].to_string(), parse_override_value(value));
    Ok(())
}

fn parse_override_value(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.to_string())
}
