//! The feedback controller: drift-signal estimation from the accuracy
//! window, learning-rate adaptation, and fusion-weight adaptation.
//!
//! The fusion rule comes in two forms. The analytic rule moves the effective
//! weight by `k_alpha * (e2_est - e1_est)` and clips into [0, 1]; it is the
//! form the convergence guarantees are stated for. The sigmoid rule nudges a
//! raw logit by a fixed step in the suspected direction. Inside
//! [`ControllerState::step`] both are gated the same way: the drift signal
//! must exceed the moderate threshold and one modality must be suspected,
//! so a quiet stream leaves the weight untouched.

use std::collections::VecDeque;

use crate::config::{ControllerConfig, LrMode};
use crate::error::ConfigError;
use crate::record::{AlphaAction, ControllerAction, LrAction};
use crate::types::{FusionWeight, Suspect};

/// Normalized accuracy drop over the sliding window.
///
/// Returns 0 until the window holds `w_drift` entries. The window is split
/// into the last `floor(w_drift * r_comp)` recent entries and the rest; if
/// past accuracy exceeds recent accuracy by more than `tau_drop`, the drop
/// normalized by past accuracy is the signal. A total past-accuracy
/// collapse saturates to 1 rather than dividing by zero.
pub fn estimate_drift_signal(config: &ControllerConfig, history: &[f64]) -> f64 {
    if history.len() < config.w_drift {
        return 0.0;
    }
    let window = &history[history.len() - config.w_drift..];
    let recent_len = config.recent_len();
    let (past, recent) = window.split_at(config.w_drift - recent_len);
    let acc_past = past.iter().sum::<f64>() / past.len() as f64;
    let acc_recent = recent.iter().sum::<f64>() / recent.len() as f64;
    let drop = acc_past - acc_recent;
    if drop > config.tau_drop {
        if acc_past <= 0.0 {
            1.0
        } else {
            (drop / acc_past).clamp(0.0, 1.0)
        }
    } else {
        0.0
    }
}

/// Threshold-mode learning-rate rule: raise on severe drift, lower on
/// moderate drift, hold otherwise, then clamp into the configured bounds.
pub fn adapt_learning_rate(config: &ControllerConfig, eta_prev: f64, s_drift: f64) -> f64 {
    let candidate = if s_drift > config.theta_high {
        eta_prev * config.k_lr
    } else if s_drift > config.theta_mod {
        eta_prev / config.k_lr
    } else {
        eta_prev
    };
    candidate.clamp(config.eta_min, config.eta_max)
}

/// Incremental-mode learning-rate rule: move by `k_eta * (e_t - e_prev)`
/// and clamp. A rising error signal speeds learning up, a falling one slows
/// it back down.
pub fn adapt_learning_rate_incremental(
    config: &ControllerConfig,
    eta_prev: f64,
    error: f64,
    error_prev: f64,
) -> f64 {
    (eta_prev + config.k_eta * (error - error_prev)).clamp(config.eta_min, config.eta_max)
}

/// Analytic fusion rule: `clip_[0,1](alpha + k_alpha * (e2_est - e1_est))`.
pub fn adapt_fusion_analytic(alpha: f64, e1_est: f64, e2_est: f64, k_alpha: f64) -> f64 {
    (alpha + k_alpha * (e2_est - e1_est)).clamp(0.0, 1.0)
}

/// Sigmoid fusion rule: step the raw parameter away from the suspected
/// modality while the drift signal is above the moderate threshold.
pub fn adapt_fusion_sigmoid(
    config: &ControllerConfig,
    raw: f64,
    s_drift: f64,
    suspected: Suspect,
) -> f64 {
    if s_drift <= config.theta_mod {
        return raw;
    }
    match suspected {
        Suspect::Modality1 => raw - config.alpha_step,
        Suspect::Modality2 => raw + config.alpha_step,
        Suspect::None => raw,
    }
}

/// Margin comparison of the two estimated modality errors.
pub fn suspect_modality(e1_est: f64, e2_est: f64, margin: f64) -> Suspect {
    if e1_est > e2_est + margin {
        Suspect::Modality1
    } else if e2_est > e1_est + margin {
        Suspect::Modality2
    } else {
        Suspect::None
    }
}

/// Everything the controller decided in one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    pub s_drift: f64,
    pub eta: f64,
    pub fusion: FusionWeight,
    pub action: ControllerAction,
    pub cost: f64,
    pub suspected: Suspect,
}

/// Controller memory: bounded accuracy and modality-error windows plus the
/// previous error signal.
#[derive(Debug, Clone)]
pub struct ControllerState {
    config: ControllerConfig,
    acc_history: VecDeque<f64>,
    e1_history: VecDeque<f64>,
    e2_history: VecDeque<f64>,
    last_error: Option<f64>,
    steps: u64,
}

impl ControllerState {
    pub fn new(config: ControllerConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let cap = config.w_drift;
        Ok(ControllerState {
            config,
            acc_history: VecDeque::with_capacity(cap),
            e1_history: VecDeque::with_capacity(cap),
            e2_history: VecDeque::with_capacity(cap),
            last_error: None,
            steps: 0,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn history_len(&self) -> usize {
        self.acc_history.len()
    }

    /// Pre-fills the accuracy window, oldest first (e.g. from a phase-1
    /// tail). Only the newest `w_drift` entries are kept.
    pub fn prime(&mut self, accuracies: &[f64]) {
        for &a in accuracies {
            push_bounded(&mut self.acc_history, a, self.config.w_drift);
        }
    }

    /// Controller error signal: 1 minus the mean accuracy over the window.
    pub fn windowed_error(&self) -> f64 {
        if self.acc_history.is_empty() {
            return 0.0;
        }
        1.0 - self.acc_history.iter().sum::<f64>() / self.acc_history.len() as f64
    }

    fn suspected_from_history(&self) -> Suspect {
        if self.e1_history.is_empty() {
            return Suspect::None;
        }
        let n = self.e1_history.len() as f64;
        let e1 = self.e1_history.iter().sum::<f64>() / n;
        let e2 = self.e2_history.iter().sum::<f64>() / n;
        suspect_modality(e1, e2, self.config.suspicion_margin)
    }

    /// One controller pass: record the batch feedback, estimate the drift
    /// signal, and produce the next learning rate and fusion weight.
    ///
    /// `e1_est`/`e2_est` are the current-step unimodal error estimates;
    /// suspicion is formed from their running windows unless
    /// `oracle_suspect` overrides it (controller-isolation debugging).
    pub fn step(
        &mut self,
        batch_accuracy: f64,
        e1_est: f64,
        e2_est: f64,
        eta_in: f64,
        fusion_in: FusionWeight,
        oracle_suspect: Option<Suspect>,
    ) -> StepDecision {
        let cap = self.config.w_drift;
        push_bounded(&mut self.acc_history, batch_accuracy, cap);
        push_bounded(&mut self.e1_history, e1_est, cap);
        push_bounded(&mut self.e2_history, e2_est, cap);

        let history: Vec<f64> = self.acc_history.iter().copied().collect();
        let s_drift = estimate_drift_signal(&self.config, &history);

        let eta_out = match self.config.lr_mode {
            LrMode::Threshold => adapt_learning_rate(&self.config, eta_in, s_drift),
            LrMode::Incremental => {
                let error = self.windowed_error();
                let prev = self.last_error.unwrap_or(error);
                adapt_learning_rate_incremental(&self.config, eta_in, error, prev)
            }
        };
        self.last_error = Some(self.windowed_error());

        let lr_action = if eta_out > eta_in {
            LrAction::Up
        } else if eta_out < eta_in {
            LrAction::Down
        } else {
            LrAction::None
        };

        let suspected = oracle_suspect.unwrap_or_else(|| self.suspected_from_history());
        let alpha_due = self.steps % self.config.alpha_period == 0;
        self.steps += 1;

        let gate_open = alpha_due && s_drift > self.config.theta_mod && suspected != Suspect::None;
        let fusion_out = if gate_open {
            match fusion_in {
                FusionWeight::Analytic { alpha } => FusionWeight::Analytic {
                    alpha: adapt_fusion_analytic(alpha, e1_est, e2_est, self.config.k_alpha),
                },
                FusionWeight::Sigmoid { raw } => FusionWeight::Sigmoid {
                    raw: adapt_fusion_sigmoid(&self.config, raw, s_drift, suspected),
                },
            }
        } else {
            fusion_in
        };

        let alpha_action = match fusion_out
            .effective()
            .partial_cmp(&fusion_in.effective())
            .expect("fusion weights are finite")
        {
            std::cmp::Ordering::Less => AlphaAction::ShiftAwayM1,
            std::cmp::Ordering::Greater => AlphaAction::ShiftAwayM2,
            std::cmp::Ordering::Equal => AlphaAction::None,
        };

        let action = ControllerAction {
            lr: lr_action,
            alpha: alpha_action,
        };
        StepDecision {
            s_drift,
            eta: eta_out,
            fusion: fusion_out,
            action,
            cost: action.cost(&self.config.cost),
            suspected,
        }
    }
}

fn push_bounded(queue: &mut VecDeque<f64>, value: f64, cap: usize) {
    if queue.len() == cap {
        queue.pop_front();
    }
    queue.push_back(value);
}
