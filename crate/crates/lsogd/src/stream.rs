//! Synthetic piecewise-stationary two-modality stream with controllable,
//! bounded, modality-specific concept drift.
//!
//! A concept is a pair of ground-truth weight vectors plus per-modality
//! informativeness, feature noise, and label noise. At stream step `t` the
//! generator draws clean standard-normal features, gates each modality's
//! label contribution by a Bernoulli(informativeness) coin, draws the label
//! from `sigmoid` of the gated concept logit, optionally flips it, and adds
//! observation noise to the features. Everything is a pure function of
//! `(schedule, seed, t)`, so samples are random-access and runs replay
//! exactly.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::config::{HarnessConfig, StreamConfig};
use crate::error::{HarnessError, StreamError};
use crate::model::sigmoid;
use crate::rng::{derive_rng, domain};
use crate::types::{Modality, Sample};

/// One stationary generating concept.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSpec {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    /// Observation-noise std dev added to each modality's features.
    pub noise1: f64,
    pub noise2: f64,
    /// Probability the modality's features carry the concept rather than
    /// pure noise.
    pub informativeness1: f64,
    pub informativeness2: f64,
    /// Probability the drawn label is flipped.
    pub label_noise: f64,
}

impl ConceptSpec {
    pub fn validate(&self) -> Result<(), StreamError> {
        for v in [self.noise1, self.noise2] {
            if !(v >= 0.0) {
                return Err(StreamError::NegativeNoise(v));
            }
        }
        for v in [self.informativeness1, self.informativeness2] {
            if !(0.0..=1.0).contains(&v) {
                return Err(StreamError::InformativenessOutOfRange(v));
            }
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(StreamError::LabelNoiseOutOfRange(self.label_noise));
        }
        Ok(())
    }

    /// The concept as a flat parameter vector; drift distances are Euclidean
    /// norms in this space.
    fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.w1.len() + self.w2.len() + 5);
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.w2);
        v.extend_from_slice(&[
            self.noise1,
            self.noise2,
            self.informativeness1,
            self.informativeness2,
            self.label_noise,
        ]);
        v
    }

    pub fn distance(&self, other: &ConceptSpec) -> f64 {
        let a = self.params();
        let b = other.params();
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Linear interpolation in parameter space, `frac` in [0, 1].
    fn lerp(&self, target: &ConceptSpec, frac: f64) -> ConceptSpec {
        let mix = |a: f64, b: f64| a + frac * (b - a);
        ConceptSpec {
            w1: self
                .w1
                .iter()
                .zip(&target.w1)
                .map(|(&a, &b)| mix(a, b))
                .collect(),
            w2: self
                .w2
                .iter()
                .zip(&target.w2)
                .map(|(&a, &b)| mix(a, b))
                .collect(),
            noise1: mix(self.noise1, target.noise1),
            noise2: mix(self.noise2, target.noise2),
            informativeness1: mix(self.informativeness1, target.informativeness1),
            informativeness2: mix(self.informativeness2, target.informativeness2),
            label_noise: mix(self.label_noise, target.label_noise),
        }
    }
}

/// How a segment's concept is reached from the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transition {
    /// Jump at the segment start.
    Sudden,
    /// Linear interpolation over `length` steps.
    Gradual { length: u64 },
    /// Constant-speed movement, `step_size` parameter distance per step.
    Incremental { step_size: f64 },
    /// Alternation between the previous and this concept every `period`
    /// steps.
    Recurring { period: u64 },
}

/// One entry of a drift schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: u64,
    pub concept: ConceptSpec,
    pub transition: Transition,
}

/// An ordered, validated sequence of concepts. Construction computes (or
/// checks) the per-step parameter-change bound, so the bounded-drift
/// property holds for every schedule that exists.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSchedule {
    segments: Vec<Segment>,
    delta_max: f64,
}

impl DriftSchedule {
    /// Builds a schedule. With `delta_max = None` the bound is set to the
    /// largest per-step change the segments produce; an explicit bound is
    /// validated against that value.
    pub fn new(segments: Vec<Segment>, delta_max: Option<f64>) -> Result<Self, StreamError> {
        if segments.is_empty() {
            return Err(StreamError::NoSegments);
        }
        if segments[0].start != 0 {
            return Err(StreamError::FirstSegmentNotAtZero(segments[0].start));
        }
        let (d1, d2) = (segments[0].concept.w1.len(), segments[0].concept.w2.len());
        for (i, seg) in segments.iter().enumerate() {
            seg.concept.validate()?;
            if seg.concept.w1.len() != d1 || seg.concept.w2.len() != d2 {
                return Err(StreamError::ConceptDimMismatch);
            }
            if i > 0 && seg.start <= segments[i - 1].start {
                return Err(StreamError::NonIncreasingSegments(i));
            }
            match seg.transition {
                Transition::Gradual { length } if length == 0 => {
                    return Err(StreamError::TransitionLengthZero)
                }
                Transition::Recurring { period } if period == 0 => {
                    return Err(StreamError::TransitionLengthZero)
                }
                Transition::Incremental { step_size } if !(step_size > 0.0) => {
                    return Err(StreamError::StepSizeNotPositive(step_size))
                }
                _ => {}
            }
        }
        let schedule = DriftSchedule {
            segments,
            delta_max: 0.0,
        };
        let (max_change, at_step) = schedule.max_step_change();
        let delta_max = match delta_max {
            Some(bound) => {
                if max_change > bound {
                    return Err(StreamError::DriftBoundExceeded {
                        step: at_step,
                        actual: max_change,
                        bound,
                    });
                }
                bound
            }
            None => max_change,
        };
        Ok(DriftSchedule {
            delta_max,
            ..schedule
        })
    }

    /// Convenience: a single stationary concept.
    pub fn stationary(concept: ConceptSpec) -> Result<Self, StreamError> {
        Self::new(
            vec![Segment {
                start: 0,
                concept,
                transition: Transition::Sudden,
            }],
            None,
        )
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Largest per-step parameter change over the whole timeline, together
    /// with a step where it occurs. Each transition kind bounds its interior
    /// analytically, so no timeline scan is needed.
    fn max_step_change(&self) -> (f64, u64) {
        let mut max = 0.0;
        let mut at = 0;
        for i in 1..self.segments.len() {
            let seg = &self.segments[i];
            let prev = self.concept_at(seg.start - 1);
            let dist = prev.distance(&seg.concept);
            let step_change = match seg.transition {
                Transition::Sudden | Transition::Recurring { .. } => dist,
                Transition::Gradual { length } => dist / length as f64,
                Transition::Incremental { step_size } => step_size.min(dist),
            };
            if step_change > max {
                max = step_change;
                at = seg.start - 1;
            }
        }
        (max, at)
    }

    fn segment_index(&self, t: u64) -> usize {
        match self.segments.binary_search_by_key(&t, |s| s.start) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// The generating concept at step `t`, with transitions resolved.
    pub fn concept_at(&self, t: u64) -> ConceptSpec {
        self.resolve(self.segment_index(t), t)
    }

    fn resolve(&self, idx: usize, t: u64) -> ConceptSpec {
        let seg = &self.segments[idx];
        if idx == 0 {
            return seg.concept.clone();
        }
        let prev = self.resolve_at_end(idx - 1, seg.start - 1);
        let elapsed = t - seg.start;
        match seg.transition {
            Transition::Sudden => seg.concept.clone(),
            Transition::Gradual { length } => {
                let frac = ((elapsed + 1) as f64 / length as f64).min(1.0);
                prev.lerp(&seg.concept, frac)
            }
            Transition::Incremental { step_size } => {
                let dist = prev.distance(&seg.concept);
                if dist == 0.0 {
                    return seg.concept.clone();
                }
                let travelled = ((elapsed + 1) as f64 * step_size).min(dist);
                prev.lerp(&seg.concept, travelled / dist)
            }
            Transition::Recurring { period } => {
                if (elapsed / period) % 2 == 0 {
                    seg.concept.clone()
                } else {
                    prev
                }
            }
        }
    }

    fn resolve_at_end(&self, idx: usize, t: u64) -> ConceptSpec {
        self.resolve(idx, t)
    }

    /// True per-step disturbance `||theta*(t+1) - theta*(t)||`. Diagnostics
    /// only; the controller never sees it.
    pub fn drift_magnitude(&self, t: u64) -> f64 {
        self.concept_at(t).distance(&self.concept_at(t + 1))
    }

    /// The modality whose informativeness has degraded relative to the
    /// initial concept at step `t`, if one clearly has. Drives the harness's
    /// oracle drift indicators.
    pub fn degraded_modality(&self, t: u64) -> Option<Modality> {
        let base = &self.segments[0].concept;
        let cur = self.concept_at(t);
        let drop1 = base.informativeness1 - cur.informativeness1;
        let drop2 = base.informativeness2 - cur.informativeness2;
        if drop1 > drop2 + 1e-12 {
            Some(Modality::M1)
        } else if drop2 > drop1 + 1e-12 {
            Some(Modality::M2)
        } else {
            None
        }
    }
}

/// Random-access sample generator: an immutable schedule plus a seed.
#[derive(Debug, Clone)]
pub struct StreamGenerator {
    schedule: DriftSchedule,
    seed: u64,
}

impl StreamGenerator {
    pub fn new(schedule: DriftSchedule, seed: u64) -> Self {
        StreamGenerator { schedule, seed }
    }

    pub fn schedule(&self) -> &DriftSchedule {
        &self.schedule
    }

    /// The sample at stream step `t`. Deterministic in `(schedule, seed, t)`;
    /// the draw order within a step is fixed (clean features, gates, label,
    /// flip, observation noise).
    pub fn sample_at(&self, t: u64) -> Sample {
        let concept = self.schedule.concept_at(t);
        let mut rng = derive_rng(self.seed, domain::SAMPLE, t);
        let mut x1: Vec<f64> = (0..concept.w1.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let mut x2: Vec<f64> = (0..concept.w2.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let use1 = rng.random_bool(concept.informativeness1);
        let use2 = rng.random_bool(concept.informativeness2);
        let mut logit = 0.0;
        if use1 {
            logit += dot(&concept.w1, &x1);
        }
        if use2 {
            logit += dot(&concept.w2, &x2);
        }
        let mut y = rng.random::<f64>() < sigmoid(logit);
        if rng.random::<f64>() < concept.label_noise {
            y = !y;
        }
        for v in x1.iter_mut() {
            let eps: f64 = rng.sample(StandardNormal);
            *v += concept.noise1 * eps;
        }
        for v in x2.iter_mut() {
            let eps: f64 = rng.sample(StandardNormal);
            *v += concept.noise2 * eps;
        }
        Sample { x1, x2, y, t }
    }

    /// A contiguous batch of samples starting at stream step `start`.
    pub fn batch(&self, start: u64, len: usize) -> Vec<Sample> {
        (0..len as u64).map(|i| self.sample_at(start + i)).collect()
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Draws a concept whose per-modality weight norms are `scale / sqrt(2)`,
/// so the combined concept logit has std `scale` when both modalities are
/// informative.
pub fn random_concept(seed: u64, index: u64, cfg: &StreamConfig) -> ConceptSpec {
    let mut rng = derive_rng(seed, domain::CONCEPT, index);
    let target = cfg.concept_scale / std::f64::consts::SQRT_2;
    let draw = |rng: &mut crate::rng::Rng, d: usize| -> Vec<f64> {
        let mut w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&w, &w).sqrt();
        if norm > 0.0 {
            for v in w.iter_mut() {
                *v *= target / norm;
            }
        }
        w
    };
    ConceptSpec {
        w1: draw(&mut rng, cfg.d1),
        w2: draw(&mut rng, cfg.d2),
        noise1: cfg.noise1,
        noise2: cfg.noise2,
        informativeness1: 1.0,
        informativeness2: 1.0,
        label_noise: cfg.label_noise,
    }
}

/// Schedule in which only the chosen modality's informativeness degrades
/// (to `1 - severity`) at `drift_step`; the other modality's concept is
/// untouched.
pub fn unilateral_drift_preset(
    base: ConceptSpec,
    which: Modality,
    severity: f64,
    drift_step: u64,
) -> Result<DriftSchedule, StreamError> {
    if !(severity > 0.0 && severity <= 1.0) {
        return Err(StreamError::SeverityOutOfRange(severity));
    }
    let mut drifted = base.clone();
    match which {
        Modality::M1 => drifted.informativeness1 = 1.0 - severity,
        Modality::M2 => drifted.informativeness2 = 1.0 - severity,
    }
    DriftSchedule::new(
        vec![
            Segment {
                start: 0,
                concept: base,
                transition: Transition::Sudden,
            },
            Segment {
                start: drift_step,
                concept: drifted,
                transition: Transition::Sudden,
            },
        ],
        None,
    )
}

/// The named presets shipped with the CLI.
pub const PRESETS: [&str; 8] = [
    "stationary",
    "sudden",
    "gradual",
    "incremental",
    "recurring",
    "unilateral-m1",
    "unilateral-m2",
    "partial-m1",
];

/// Builds the schedule a `(stream, harness)` configuration describes.
///
/// Whole-concept presets (`sudden`, `gradual`, `incremental`, `recurring`)
/// drift to the sign-flipped concept, inverting the label relationship.
/// Unilateral presets degrade one modality's informativeness by `severity`;
/// `partial-m1` is the half-severity variant. Drift lands at
/// `stream.drift_step` when set, otherwise one third into phase 2.
pub fn build_schedule(
    stream: &StreamConfig,
    harness: &HarnessConfig,
) -> Result<DriftSchedule, HarnessError> {
    let base = random_concept(harness.seed, 0, stream);
    let drift_step = stream
        .drift_step
        .unwrap_or(harness.phase1_samples() + harness.phase2_samples() / 3);
    let flipped = || {
        let mut c = base.clone();
        for v in c.w1.iter_mut().chain(c.w2.iter_mut()) {
            *v = -*v;
        }
        c
    };
    let two_segment = |concept: ConceptSpec, transition: Transition| {
        DriftSchedule::new(
            vec![
                Segment {
                    start: 0,
                    concept: base.clone(),
                    transition: Transition::Sudden,
                },
                Segment {
                    start: drift_step,
                    concept,
                    transition,
                },
            ],
            stream.delta_max,
        )
    };
    let schedule = match stream.preset.as_str() {
        "stationary" => DriftSchedule::new(
            vec![Segment {
                start: 0,
                concept: base.clone(),
                transition: Transition::Sudden,
            }],
            stream.delta_max,
        )?,
        "sudden" => two_segment(flipped(), Transition::Sudden)?,
        "gradual" => two_segment(
            flipped(),
            Transition::Gradual {
                length: stream.gradual_len,
            },
        )?,
        "incremental" => two_segment(
            flipped(),
            Transition::Incremental {
                step_size: stream.incremental_step,
            },
        )?,
        "recurring" => two_segment(
            flipped(),
            Transition::Recurring {
                period: stream.period,
            },
        )?,
        "unilateral-m1" => {
            unilateral_drift_preset(base.clone(), Modality::M1, stream.severity, drift_step)?
        }
        "unilateral-m2" => {
            unilateral_drift_preset(base.clone(), Modality::M2, stream.severity, drift_step)?
        }
        "partial-m1" => unilateral_drift_preset(base.clone(), Modality::M1, 0.5, drift_step)?,
        other => return Err(StreamError::UnknownPreset(other.to_string()).into()),
    };
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn test_cfg() -> StreamConfig {
        StreamConfig {
            d1: 4,
            d2: 4,
            concept_scale: 70.0,
            ..StreamConfig::default()
        }
    }

    fn base_concept() -> ConceptSpec {
        random_concept(5, 0, &test_cfg())
    }

    #[test]
    fn stationary_zero_noise_labels_follow_the_concept() {
        // Realizable concept: at scale 70 the label agrees with the sign of
        // the concept logit except for a sub-percent logistic fringe.
        let concept = base_concept();
        let schedule = DriftSchedule::stationary(concept.clone()).unwrap();
        let stream = StreamGenerator::new(schedule, 9);
        let n = 4000;
        let agree = (0..n)
            .filter(|&t| {
                let s = stream.sample_at(t);
                (dot(&concept.w1, &s.x1) + dot(&concept.w2, &s.x2) >= 0.0) == s.y
            })
            .count();
        let rate = agree as f64 / n as f64;
        assert!(rate >= 0.98, "agreement {rate}");
    }

    #[test]
    fn uninformative_modality_is_independent_of_labels() {
        let mut concept = base_concept();
        concept.informativeness1 = 0.0;
        let schedule = DriftSchedule::stationary(concept).unwrap();
        let stream = StreamGenerator::new(schedule, 13);
        let n = 10_000usize;
        let samples: Vec<Sample> = (0..n as u64).map(|t| stream.sample_at(t)).collect();
        let y_mean = samples.iter().filter(|s| s.y).count() as f64 / n as f64;
        for coord in 0..4 {
            let xs: Vec<f64> = samples.iter().map(|s| s.x1[coord]).collect();
            let x_mean = xs.iter().sum::<f64>() / n as f64;
            let mut cov = 0.0;
            let mut var_x = 0.0;
            for (x, s) in xs.iter().zip(&samples) {
                let yv = if s.y { 1.0 } else { 0.0 };
                cov += (x - x_mean) * (yv - y_mean);
                var_x += (x - x_mean) * (x - x_mean);
            }
            let var_y = y_mean * (1.0 - y_mean) * n as f64;
            let corr = cov / (var_x * var_y).sqrt();
            assert!(corr.abs() < 0.05, "coord {coord}: corr {corr}");
        }
    }

    #[test]
    fn sudden_transition_is_piecewise_constant() {
        let base = base_concept();
        let mut drifted = base.clone();
        drifted.informativeness1 = 0.0;
        let schedule = DriftSchedule::new(
            vec![
                Segment {
                    start: 0,
                    concept: base.clone(),
                    transition: Transition::Sudden,
                },
                Segment {
                    start: 1000,
                    concept: drifted.clone(),
                    transition: Transition::Sudden,
                },
            ],
            None,
        )
        .unwrap();
        for t in [0, 1, 500, 999] {
            assert_eq!(schedule.concept_at(t), base);
        }
        for t in [1000, 1001, 5000] {
            assert_eq!(schedule.concept_at(t), drifted);
        }
        assert_eq!(schedule.drift_magnitude(500), 0.0);
        assert!(schedule.drift_magnitude(999) > 0.0);
        assert_eq!(schedule.drift_magnitude(1000), 0.0);
    }

    #[test]
    fn gradual_transition_moves_distance_over_length_per_step() {
        let base = base_concept();
        let mut target = base.clone();
        target.informativeness1 = 0.0;
        target.label_noise = 0.2;
        let total = base.distance(&target);
        let length = 40;
        let schedule = DriftSchedule::new(
            vec![
                Segment {
                    start: 0,
                    concept: base,
                    transition: Transition::Sudden,
                },
                Segment {
                    start: 100,
                    concept: target,
                    transition: Transition::Gradual { length },
                },
            ],
            None,
        )
        .unwrap();
        let per_step = total / length as f64;
        assert!((schedule.delta_max() - per_step).abs() < 1e-12);
        // The concept starts moving on the step into the segment and lands
        // on the target after `length` increments.
        for t in 99..(99 + length) {
            assert!((schedule.drift_magnitude(t) - per_step).abs() < 1e-9, "t={t}");
        }
        assert_eq!(schedule.drift_magnitude(99 + length), 0.0);
    }

    #[test]
    fn incremental_transition_respects_step_size() {
        let base = base_concept();
        let mut target = base.clone();
        target.informativeness2 = 0.3;
        let schedule = DriftSchedule::new(
            vec![
                Segment {
                    start: 0,
                    concept: base,
                    transition: Transition::Sudden,
                },
                Segment {
                    start: 10,
                    concept: target,
                    transition: Transition::Incremental { step_size: 0.05 },
                },
            ],
            None,
        )
        .unwrap();
        assert!(schedule.delta_max() <= 0.05 + 1e-12);
        for t in 9..40 {
            assert!(schedule.drift_magnitude(t) <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn recurring_transition_alternates_concepts() {
        let base = base_concept();
        let mut other = base.clone();
        other.informativeness1 = 0.2;
        let schedule = DriftSchedule::new(
            vec![
                Segment {
                    start: 0,
                    concept: base.clone(),
                    transition: Transition::Sudden,
                },
                Segment {
                    start: 100,
                    concept: other.clone(),
                    transition: Transition::Recurring { period: 50 },
                },
            ],
            None,
        )
        .unwrap();
        assert_eq!(schedule.concept_at(120), other);
        assert_eq!(schedule.concept_at(170), base);
        assert_eq!(schedule.concept_at(220), other);
    }

    #[test]
    fn explicit_delta_max_is_validated() {
        let base = base_concept();
        let mut drifted = base.clone();
        drifted.informativeness1 = 0.0;
        let err = DriftSchedule::new(
            vec![
                Segment {
                    start: 0,
                    concept: base,
                    transition: Transition::Sudden,
                },
                Segment {
                    start: 10,
                    concept: drifted,
                    transition: Transition::Sudden,
                },
            ],
            Some(0.5),
        )
        .unwrap_err();
        assert!(matches!(err, StreamError::DriftBoundExceeded { .. }));
    }

    #[test]
    fn unilateral_preset_boundaries() {
        let base = base_concept();
        // Severity 1: the drifted modality becomes pure noise.
        let schedule = unilateral_drift_preset(base.clone(), Modality::M1, 1.0, 50).unwrap();
        assert_eq!(schedule.concept_at(60).informativeness1, 0.0);
        assert_eq!(schedule.concept_at(60).informativeness2, 1.0);
        assert_eq!(schedule.degraded_modality(60), Some(Modality::M1));
        assert_eq!(schedule.degraded_modality(10), None);

        // Partial degradation.
        let schedule = unilateral_drift_preset(base.clone(), Modality::M2, 0.5, 50).unwrap();
        assert_eq!(schedule.concept_at(60).informativeness2, 0.5);

        // Vanishing severity approaches the stationary schedule.
        let schedule = unilateral_drift_preset(base.clone(), Modality::M1, 1e-12, 50).unwrap();
        assert!(schedule.delta_max() < 1e-9);

        assert_eq!(
            unilateral_drift_preset(base, Modality::M1, 0.0, 50).unwrap_err(),
            StreamError::SeverityOutOfRange(0.0)
        );
    }

    #[test]
    fn build_schedule_covers_all_presets() {
        let harness = HarnessConfig::default();
        for preset in PRESETS {
            let cfg = StreamConfig {
                preset: preset.to_string(),
                ..test_cfg()
            };
            let schedule = build_schedule(&cfg, &harness).unwrap();
            let segments = schedule.segments().len();
            if preset == "stationary" {
                assert_eq!(segments, 1);
            } else {
                assert_eq!(segments, 2);
                assert_eq!(schedule.segments()[1].start, 32_000);
            }
        }
        let cfg = StreamConfig {
            preset: "bogus".to_string(),
            ..test_cfg()
        };
        assert!(build_schedule(&cfg, &harness).is_err());
    }

    #[test]
    fn same_schedule_and_seed_replay_exactly() {
        let cfg = test_cfg();
        let harness = HarnessConfig::default();
        let a = StreamGenerator::new(build_schedule(&cfg, &harness).unwrap(), 77);
        let b = StreamGenerator::new(build_schedule(&cfg, &harness).unwrap(), 77);
        for t in (0..5000).step_by(97) {
            assert_eq!(a.sample_at(t), b.sample_at(t));
        }
        let c = StreamGenerator::new(build_schedule(&cfg, &harness).unwrap(), 78);
        assert_ne!(a.sample_at(0), c.sample_at(0));
    }

    proptest! {
        #[test]
        fn drift_magnitude_never_exceeds_delta_max(
            seed in 0u64..1000,
            start2 in 10u64..60,
            kind in 0usize..4,
            length in 1u64..40,
            severity in 0.05f64..1.0,
        ) {
            let cfg = test_cfg();
            let base = random_concept(seed, 0, &cfg);
            let mut target = random_concept(seed, 1, &cfg);
            target.informativeness1 = 1.0 - severity;
            let transition = match kind {
                0 => Transition::Sudden,
                1 => Transition::Gradual { length },
                2 => Transition::Incremental { step_size: 0.5 },
                _ => Transition::Recurring { period: length },
            };
            let schedule = DriftSchedule::new(
                vec![
                    Segment { start: 0, concept: base, transition: Transition::Sudden },
                    Segment { start: start2, concept: target, transition },
                ],
                None,
            ).unwrap();
            for t in 0..(start2 + 4 * length + 10) {
                prop_assert!(schedule.drift_magnitude(t) <= schedule.delta_max() + 1e-9);
            }
        }

        #[test]
        fn samples_are_deterministic_in_seed_and_step(seed in 0u64..500, t in 0u64..10_000) {
            let cfg = test_cfg();
            let schedule = DriftSchedule::stationary(random_concept(seed, 0, &cfg)).unwrap();
            let g = StreamGenerator::new(schedule, seed);
            prop_assert_eq!(g.sample_at(t), g.sample_at(t));
        }
    }
}
