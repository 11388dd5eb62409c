//! The experiment harness: phase-1 training, the phase-2 adaptation loop
//! (adaptive and frozen-baseline modes), summary metrics, and CSV output.
//!
//! One harness step consumes `batch_size` consecutive stream steps. Each
//! phase-2 step runs forward -> evaluate -> push feedback -> controller ->
//! apply the new learning rate -> gradient step -> apply the new fusion
//! weight -> record. The logged `eta`/`alpha` are the post-controller
//! values, and the recorded error signal is `1 -` the sliding-window mean
//! of batch accuracies over `metrics_window` steps (a separate scope from
//! the controller's own `w_drift` window).

use std::collections::VecDeque;

use crate::config::RunConfig;
use crate::controller::ControllerState;
use crate::error::HarnessError;
use crate::model::{BatchEval, ModelState};
use crate::record::{ControllerAction, StepRecord};
use crate::stream::{build_schedule, DriftSchedule, StreamGenerator};
use crate::types::{AlphaMode, FusionWeight, Modality, Sample, Suspect};

/// Confusion counts for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fne: u64,
    pub tn: u64,
}

impl Confusion {
    fn from_eval(eval: &BatchEval) -> Self {
        Confusion {
            tp: eval.tp,
            fp: eval.fp,
            fne: eval.fne,
            tn: eval.tn,
        }
    }

    fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fne += other.fne;
        self.tn += other.tn;
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.tp + self.fp + self.fne + self.tn;
        if total == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / total as f64
    }
}

/// F1 of the positive class; 0 when precision + recall is 0.
pub fn f1_score(tp: u64, fp: u64, fne: u64) -> f64 {
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fne == 0 {
        0.0
    } else {
        tp as f64 / (tp + fne) as f64
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Output of one phase-2 run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<StepRecord>,
    pub confusion: Vec<Confusion>,
}

/// Aggregated run metrics. "Terminal" pools the last `window` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub mean_accuracy: f64,
    pub mean_loss: f64,
    pub mean_f1: f64,
    pub terminal_accuracy: f64,
    pub terminal_error: f64,
    pub terminal_f1: f64,
    pub cumulative_cost: f64,
    pub final_eta: f64,
    pub final_alpha: f64,
}

/// Pools per-step records into a summary over the whole run and over the
/// last `window` steps.
pub fn compute_metrics(result: &RunResult, window: usize) -> Result<MetricsSummary, HarnessError> {
    if result.records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    let n = result.records.len();
    let mut whole = Confusion::default();
    for c in &result.confusion {
        whole.add(c);
    }
    let mut terminal = Confusion::default();
    for c in &result.confusion[n.saturating_sub(window)..] {
        terminal.add(c);
    }
    let last = &result.records[n - 1];
    Ok(MetricsSummary {
        mean_accuracy: result.records.iter().map(|r| r.accuracy).sum::<f64>() / n as f64,
        mean_loss: result.records.iter().map(|r| r.loss).sum::<f64>() / n as f64,
        mean_f1: f1_score(whole.tp, whole.fp, whole.fne),
        terminal_accuracy: terminal.accuracy(),
        terminal_error: 1.0 - terminal.accuracy(),
        terminal_f1: f1_score(terminal.tp, terminal.fp, terminal.fne),
        cumulative_cost: last.cumulative_cost,
        final_eta: last.eta,
        final_alpha: last.alpha_effective,
    })
}

/// Phase-1 output: the trained model and its frozen copy for the baseline,
/// plus the tail of batch accuracies for optional history priming.
#[derive(Debug, Clone)]
pub struct Phase1Result {
    pub model: ModelState,
    pub baseline: ModelState,
    pub tail_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase2Mode {
    Adaptive,
    StaticBaseline,
}

/// A configured experiment: validated config, built schedule, and the
/// deterministic stream.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: RunConfig,
    stream: StreamGenerator,
}

impl Experiment {
    pub fn new(config: RunConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let schedule = build_schedule(&config.stream, &config.harness)?;
        let needed = config.harness.phase1_samples();
        let first_segment_end = schedule
            .segments()
            .get(1)
            .map(|s| s.start)
            .unwrap_or(u64::MAX);
        if first_segment_end < needed {
            return Err(HarnessError::Phase1NotStationary {
                available: first_segment_end,
                needed,
            });
        }
        let stream = StreamGenerator::new(schedule, config.harness.seed);
        Ok(Experiment { config, stream })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn schedule(&self) -> &DriftSchedule {
        self.stream.schedule()
    }

    pub fn stream(&self) -> &StreamGenerator {
        &self.stream
    }

    fn initial_fusion(&self) -> FusionWeight {
        match self.config.controller.alpha_mode {
            AlphaMode::Analytic => FusionWeight::analytic(0.5),
            // sigmoid(0) = 0.5: same starting weight in raw form.
            AlphaMode::Sigmoid => FusionWeight::sigmoid(0.0),
        }
    }

    /// Phase 1: fixed learning rate, equal fusion weight, no controller.
    pub fn run_phase1(&self) -> Result<Phase1Result, HarnessError> {
        let h = &self.config.harness;
        let mut model = ModelState::zeros(
            self.config.stream.d1,
            self.config.stream.d2,
            self.initial_fusion(),
            h.eta0,
        );
        let mut tail: VecDeque<f64> = VecDeque::with_capacity(self.config.controller.w_drift);
        for step in 0..h.phase1_steps {
            let batch = self
                .stream
                .batch(step * h.batch_size as u64, h.batch_size);
            let eval = model.evaluate_batch(&batch)?;
            if tail.len() == self.config.controller.w_drift {
                tail.pop_front();
            }
            tail.push_back(eval.accuracy);
            model.sgd_step(&batch)?;
        }
        let baseline = model.clone();
        Ok(Phase1Result {
            model,
            baseline,
            tail_accuracies: tail.into_iter().collect(),
        })
    }

    /// Phase 2: the adaptation loop, or evaluation-only for the frozen
    /// baseline.
    pub fn run_phase2(
        &self,
        mut model: ModelState,
        mode: Phase2Mode,
        primed: Option<&[f64]>,
    ) -> Result<RunResult, HarnessError> {
        let h = &self.config.harness;
        let offset = h.phase1_samples();
        let mut controller = ControllerState::new(self.config.controller.clone())?;
        if let Some(accs) = primed {
            controller.prime(accs);
        }

        let mut records = Vec::with_capacity(h.phase2_steps as usize);
        let mut confusion = Vec::with_capacity(h.phase2_steps as usize);
        let mut acc_window: VecDeque<f64> = VecDeque::with_capacity(h.metrics_window);
        let mut pending: VecDeque<(Vec<Sample>, BatchEval)> = VecDeque::new();
        let mut prev_error = 0.0;
        let mut prev_v = 0.0;
        let mut cumulative_cost = 0.0;

        for step in 0..h.phase2_steps {
            let start = offset + step * h.batch_size as u64;
            let batch = self.stream.batch(start, h.batch_size);
            let eval = model.evaluate_batch(&batch)?;

            let mut s_drift = 0.0;
            let mut action = ControllerAction::NONE;
            let mut cost = 0.0;
            if mode == Phase2Mode::Adaptive {
                pending.push_back((batch, eval));
                if pending.len() > h.label_delay {
                    let (fb_batch, fb_eval) =
                        pending.pop_front().expect("pending is nonempty");
                    let oracle = if h.oracle_indicators {
                        Some(match self.schedule().degraded_modality(fb_batch[0].t) {
                            Some(Modality::M1) => Suspect::Modality1,
                            Some(Modality::M2) => Suspect::Modality2,
                            None => Suspect::None,
                        })
                    } else {
                        None
                    };
                    let decision = controller.step(
                        fb_eval.accuracy,
                        fb_eval.e1_est,
                        fb_eval.e2_est,
                        model.eta,
                        model.fusion,
                        oracle,
                    );
                    model.eta = decision.eta;
                    model.sgd_step(&fb_batch)?;
                    model.fusion = decision.fusion;
                    s_drift = decision.s_drift;
                    action = decision.action;
                    cost = decision.cost;
                }
            }
            cumulative_cost += cost;

            if acc_window.len() == h.metrics_window {
                acc_window.pop_front();
            }
            acc_window.push_back(eval.accuracy);
            let windowed_acc = acc_window.iter().sum::<f64>() / acc_window.len() as f64;
            let error_signal = 1.0 - windowed_acc;
            let v = 0.5 * error_signal * error_signal;
            let (delta_error, delta_v) = if step == 0 {
                (0.0, 0.0)
            } else {
                (error_signal - prev_error, v - prev_v)
            };
            prev_error = error_signal;
            prev_v = v;

            records.push(StepRecord {
                t: step,
                loss: eval.loss,
                accuracy: eval.accuracy,
                error_signal,
                delta_error,
                drift_signal: s_drift,
                eta: model.eta,
                alpha_effective: model.fusion.effective(),
                action,
                cost,
                cumulative_cost,
                v,
                delta_v,
            });
            confusion.push(Confusion::from_eval(&eval));
        }
        Ok(RunResult { records, confusion })
    }

    /// The full two-phase protocol: train, then run phase 2 in both
    /// adaptive and frozen-baseline modes over the same stream.
    pub fn run(&self) -> Result<ExperimentOutcome, HarnessError> {
        let phase1 = self.run_phase1()?;
        let primed = self
            .config
            .harness
            .prime_history
            .then_some(phase1.tail_accuracies.as_slice());
        let adaptive = self.run_phase2(phase1.model.clone(), Phase2Mode::Adaptive, primed)?;
        let baseline =
            self.run_phase2(phase1.baseline.clone(), Phase2Mode::StaticBaseline, None)?;
        let window = self.config.harness.terminal_window;
        let adaptive_summary = compute_metrics(&adaptive, window)?;
        let static_summary = compute_metrics(&baseline, window)?;
        Ok(ExperimentOutcome {
            phase1,
            adaptive,
            baseline,
            adaptive_summary,
            static_summary,
        })
    }
}

/// Everything a full experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub phase1: Phase1Result,
    pub adaptive: RunResult,
    pub baseline: RunResult,
    pub adaptive_summary: MetricsSummary,
    pub static_summary: MetricsSummary,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ControllerConfig, HarnessConfig, StreamConfig};
    use crate::error::ConfigError;
    use crate::record::LrAction;

    fn small_config(preset: &str) -> RunConfig {
        RunConfig {
            stream: StreamConfig {
                preset: preset.to_string(),
                d1: 4,
                d2: 4,
                ..StreamConfig::default()
            },
            controller: ControllerConfig {
                w_drift: 30,
                ..ControllerConfig::default()
            },
            harness: HarnessConfig {
                phase1_steps: 250,
                phase2_steps: 400,
                batch_size: 8,
                eta0: 2e-3,
                seed: 11,
                metrics_window: 25,
                terminal_window: 50,
                ..HarnessConfig::default()
            },
            ..RunConfig::default()
        }
    }

    #[test]
    fn phase1_learns_a_separable_stationary_concept() {
        let exp = Experiment::new(small_config("stationary")).unwrap();
        let phase1 = exp.run_phase1().unwrap();
        let tail = &phase1.tail_accuracies;
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!(mean >= 0.95, "phase-1 tail accuracy {mean}");
        assert_eq!(phase1.model, phase1.baseline);
    }

    #[test]
    fn phase1_is_deterministic() {
        let exp = Experiment::new(small_config("stationary")).unwrap();
        let a = exp.run_phase1().unwrap();
        let b = exp.run_phase1().unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.tail_accuracies, b.tail_accuracies);
    }

    #[test]
    fn zero_phase_steps_rejected() {
        let mut cfg = small_config("stationary");
        cfg.harness.phase1_steps = 0;
        match Experiment::new(cfg) {
            Err(HarnessError::Config(ConfigError::PhaseStepsZero("phase1_steps"))) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn drift_inside_phase1_rejected() {
        let mut cfg = small_config("sudden");
        cfg.stream.drift_step = Some(100);
        assert!(matches!(
            Experiment::new(cfg),
            Err(HarnessError::Phase1NotStationary { .. })
        ));
    }

    #[test]
    fn quiescent_on_stationary_streams() {
        let exp = Experiment::new(small_config("stationary")).unwrap();
        let outcome = exp.run().unwrap();
        for r in &outcome.adaptive.records {
            assert_eq!(r.drift_signal, 0.0, "step {}", r.t);
            assert!(r.action.is_none());
            assert_eq!(r.eta, 2e-3);
            assert_eq!(r.alpha_effective, 0.5);
        }
        assert_eq!(outcome.adaptive_summary.cumulative_cost, 0.0);
    }

    #[test]
    fn static_baseline_degrades_after_drift() {
        let exp = Experiment::new(small_config("sudden")).unwrap();
        let outcome = exp.run().unwrap();
        let records = &outcome.baseline.records;
        let drift_at = 400 / 3;
        let pre: Vec<f64> = records[..drift_at].iter().map(|r| r.accuracy).collect();
        let post: Vec<f64> = records[drift_at + 30..].iter().map(|r| r.accuracy).collect();
        let pre_mean = pre.iter().sum::<f64>() / pre.len() as f64;
        let post_mean = post.iter().sum::<f64>() / post.len() as f64;
        assert!(
            post_mean < pre_mean - 0.3,
            "pre {pre_mean} vs post {post_mean}"
        );
    }

    #[test]
    fn adaptive_raises_learning_rate_under_severe_drift() {
        let exp = Experiment::new(small_config("sudden")).unwrap();
        let outcome = exp.run().unwrap();
        assert!(outcome
            .adaptive
            .records
            .iter()
            .any(|r| r.action.lr == LrAction::Up));
        assert!(outcome
            .adaptive
            .records
            .iter()
            .any(|r| r.drift_signal > 0.7));
    }

    #[test]
    fn trace_invariants_hold_on_every_preset() {
        for preset in ["sudden", "gradual", "recurring", "unilateral-m1"] {
            let cfg = small_config(preset);
            let (eta_min, eta_max) = (cfg.controller.eta_min, cfg.controller.eta_max);
            let exp = Experiment::new(cfg).unwrap();
            let outcome = exp.run().unwrap();
            for result in [&outcome.adaptive, &outcome.baseline] {
                let mut prev_cost = 0.0;
                let mut prev_error = 0.0;
                let mut prev_v = 0.0;
                for (i, r) in result.records.iter().enumerate() {
                    assert!(r.eta >= eta_min && r.eta <= eta_max);
                    assert!((0.0..=1.0).contains(&r.alpha_effective));
                    assert!(r.cumulative_cost >= prev_cost);
                    if r.action.is_none() {
                        assert_eq!(r.cumulative_cost, prev_cost, "{preset} step {i}");
                    }
                    assert_eq!(r.v, 0.5 * r.error_signal * r.error_signal);
                    if i > 0 {
                        assert_eq!(r.delta_error, r.error_signal - prev_error);
                        assert_eq!(r.delta_v, r.v - prev_v);
                    }
                    prev_cost = r.cumulative_cost;
                    prev_error = r.error_signal;
                    prev_v = r.v;
                }
            }
        }
    }

    #[test]
    fn adaptive_beats_static_on_drift_presets() {
        for preset in ["sudden", "gradual", "recurring", "unilateral-m1", "unilateral-m2"] {
            let exp = Experiment::new(small_config(preset)).unwrap();
            let outcome = exp.run().unwrap();
            assert!(
                outcome.adaptive_summary.terminal_f1 > outcome.static_summary.terminal_f1,
                "{preset}: adaptive {} vs static {}",
                outcome.adaptive_summary.terminal_f1,
                outcome.static_summary.terminal_f1
            );
        }
    }

    #[test]
    fn partial_degradation_reduces_reliance_without_full_shutoff() {
        let mut cfg = small_config("partial-m1");
        cfg.harness.phase2_steps = 600;
        let exp = Experiment::new(cfg).unwrap();
        let outcome = exp.run().unwrap();
        let final_alpha = outcome.adaptive_summary.final_alpha;
        assert!(final_alpha < 0.5, "alpha should fall, got {final_alpha}");
        assert!(
            outcome.adaptive_summary.terminal_accuracy > 0.8,
            "terminal accuracy {}",
            outcome.adaptive_summary.terminal_accuracy
        );
    }

    #[test]
    fn label_delay_defers_controller_feedback() {
        let mut cfg = small_config("sudden");
        cfg.harness.label_delay = 3;
        let exp = Experiment::new(cfg).unwrap();
        let outcome = exp.run().unwrap();
        // The run completes and still adapts, three steps late.
        assert!(outcome
            .adaptive
            .records
            .iter()
            .any(|r| !r.action.is_none()));
    }

    #[test]
    fn metrics_f1_conventions() {
        assert_eq!(f1_score(10, 0, 0), 1.0);
        assert_eq!(f1_score(0, 0, 5), 0.0);
        assert_eq!(f1_score(0, 0, 0), 0.0);
        assert!((f1_score(8, 2, 2) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn compute_metrics_rejects_empty_runs() {
        let empty = RunResult {
            records: vec![],
            confusion: vec![],
        };
        assert!(matches!(
            compute_metrics(&empty, 10),
            Err(HarnessError::NoRecords)
        ));
    }
}
