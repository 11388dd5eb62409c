//! The two-modality online learner: per-modality linear scorers, weighted
//! late fusion, binary cross entropy, and plain SGD updates.
//!
//! Fusion happens at the logit level by default (`z = alpha*z1 +
//! (1-alpha)*z2`, prediction `sigmoid(z)`); probability-level fusion
//! (`p = alpha*p1 + (1-alpha)*p2`) is available behind [`FusionLevel`].
//! The fusion weight itself is never moved by gradients — it belongs to the
//! controller.

use crate::error::ModelError;
use crate::types::{FusionWeight, Modality, Sample};

/// Probabilities are clamped into `[P_FLOOR, 1 - P_FLOOR]` before taking
/// logs, so the loss stays finite on saturated predictions.
pub const P_FLOOR: f64 = 1e-12;

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Where the two modality scores are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionLevel {
    #[default]
    Logit,
    Probability,
}

/// Everything produced by one forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub z1: f64,
    pub z2: f64,
    /// Fused logit; in probability-level fusion this is the logit of the
    /// fused probability.
    pub z_fused: f64,
    pub p: f64,
}

impl Prediction {
    /// Predicted class at threshold 0.5; a tie counts as the positive class.
    pub fn class(&self) -> bool {
        self.p >= 0.5
    }
}

/// Gradients of the batch-mean loss with respect to the learner weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: f64,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Per-batch evaluation, the harness's unit of feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEval {
    pub loss: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    pub fne: u64,
    pub tn: u64,
    /// Error rate of modality-1-only sign predictions over the batch.
    pub e1_est: f64,
    /// Error rate of modality-2-only sign predictions over the batch.
    pub e2_est: f64,
}

/// The learner's full mutable state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub w1: Vec<f64>,
    pub b1: f64,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub fusion: FusionWeight,
    pub eta: f64,
    pub fusion_level: FusionLevel,
}

impl ModelState {
    /// Zero-initialized learner.
    pub fn zeros(d1: usize, d2: usize, fusion: FusionWeight, eta: f64) -> Self {
        ModelState {
            w1: vec![0.0; d1],
            b1: 0.0,
            w2: vec![0.0; d2],
            b2: 0.0,
            fusion,
            eta,
            fusion_level: FusionLevel::Logit,
        }
    }

    /// Linear score of one modality: `w_m . x_m + b_m`.
    pub fn modality_logit(&self, sample: &Sample, m: Modality) -> Result<f64, ModelError> {
        let (w, b, x, tag) = match m {
            Modality::M1 => (&self.w1, self.b1, &sample.x1, 1),
            Modality::M2 => (&self.w2, self.b2, &sample.x2, 2),
        };
        if w.len() != x.len() {
            return Err(ModelError::DimensionMismatch {
                modality: tag,
                expected: w.len(),
                actual: x.len(),
            });
        }
        Ok(w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b)
    }

    /// Forward pass through both modalities and the fusion.
    pub fn fused_prediction(&self, sample: &Sample) -> Result<Prediction, ModelError> {
        let z1 = self.modality_logit(sample, Modality::M1)?;
        let z2 = self.modality_logit(sample, Modality::M2)?;
        let alpha = self.fusion.effective();
        match self.fusion_level {
            FusionLevel::Logit => {
                let z = alpha * z1 + (1.0 - alpha) * z2;
                Ok(Prediction {
                    z1,
                    z2,
                    z_fused: z,
                    p: sigmoid(z),
                })
            }
            FusionLevel::Probability => {
                let p = alpha * sigmoid(z1) + (1.0 - alpha) * sigmoid(z2);
                let p = p.clamp(P_FLOOR, 1.0 - P_FLOOR);
                Ok(Prediction {
                    z1,
                    z2,
                    z_fused: (p / (1.0 - p)).ln(),
                    p,
                })
            }
        }
    }

    /// Batch-mean loss, accuracy, confusion counts, and per-modality error
    /// estimates in one pass.
    pub fn evaluate_batch(&self, batch: &[Sample]) -> Result<BatchEval, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let mut loss = 0.0;
        let (mut tp, mut fp, mut fne, mut tn) = (0u64, 0u64, 0u64, 0u64);
        let (mut wrong1, mut wrong2) = (0usize, 0usize);
        for sample in batch {
            let pred = self.fused_prediction(sample)?;
            loss += bce_loss(pred.p, sample.y)?;
            match (pred.class(), sample.y) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fne += 1,
                (false, false) => tn += 1,
            }
            if (pred.z1 >= 0.0) != sample.y {
                wrong1 += 1;
            }
            if (pred.z2 >= 0.0) != sample.y {
                wrong2 += 1;
            }
        }
        let n = batch.len() as f64;
        Ok(BatchEval {
            loss: loss / n,
            accuracy: (tp + tn) as f64 / n,
            tp,
            fp,
            fne,
            tn,
            e1_est: wrong1 as f64 / n,
            e2_est: wrong2 as f64 / n,
        })
    }

    /// Error rates of hypothetical single-modality predictions over a
    /// window: what each modality alone would have scored.
    pub fn unimodal_error_estimates(&self, window: &[Sample]) -> Result<(f64, f64), ModelError> {
        if window.is_empty() {
            return Err(ModelError::EmptyWindow);
        }
        let (mut wrong1, mut wrong2) = (0usize, 0usize);
        for sample in window {
            let z1 = self.modality_logit(sample, Modality::M1)?;
            let z2 = self.modality_logit(sample, Modality::M2)?;
            if (z1 >= 0.0) != sample.y {
                wrong1 += 1;
            }
            if (z2 >= 0.0) != sample.y {
                wrong2 += 1;
            }
        }
        let n = window.len() as f64;
        Ok((wrong1 as f64 / n, wrong2 as f64 / n))
    }

    /// Gradients of the batch-mean loss with respect to `w1, b1, w2, b2`.
    /// The fusion weight and the learning rate are controller territory and
    /// receive no gradient.
    pub fn gradients(&self, batch: &[Sample]) -> Result<Gradients, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let alpha = self.fusion.effective();
        let mut g = Gradients {
            w1: vec![0.0; self.w1.len()],
            b1: 0.0,
            w2: vec![0.0; self.w2.len()],
            b2: 0.0,
        };
        let scale = 1.0 / batch.len() as f64;
        for sample in batch {
            let pred = self.fused_prediction(sample)?;
            let y = sample.target();
            // dL/dz_m per fusion level; for logit fusion dL/dz = p - y and
            // the chain rule through z gives the alpha factors directly.
            let (d1, d2) = match self.fusion_level {
                FusionLevel::Logit => {
                    let dz = pred.p - y;
                    (alpha * dz, (1.0 - alpha) * dz)
                }
                FusionLevel::Probability => {
                    let p = pred.p;
                    let dp = (p - y) / (p * (1.0 - p));
                    let (p1, p2) = (sigmoid(pred.z1), sigmoid(pred.z2));
                    (
                        alpha * p1 * (1.0 - p1) * dp,
                        (1.0 - alpha) * p2 * (1.0 - p2) * dp,
                    )
                }
            };
            for (gi, xi) in g.w1.iter_mut().zip(&sample.x1) {
                *gi += scale * d1 * xi;
            }
            g.b1 += scale * d1;
            for (gi, xi) in g.w2.iter_mut().zip(&sample.x2) {
                *gi += scale * d2 * xi;
            }
            g.b2 += scale * d2;
        }
        let finite = g.w1.iter().chain(g.w2.iter()).all(|v| v.is_finite())
            && g.b1.is_finite()
            && g.b2.is_finite();
        if !finite {
            return Err(ModelError::NonFiniteGradient);
        }
        Ok(g)
    }

    /// One SGD step on the batch-mean loss at the current learning rate.
    pub fn sgd_step(&mut self, batch: &[Sample]) -> Result<(), ModelError> {
        let g = self.gradients(batch)?;
        for (wi, gi) in self.w1.iter_mut().zip(&g.w1) {
            *wi -= self.eta * gi;
        }
        self.b1 -= self.eta * g.b1;
        for (wi, gi) in self.w2.iter_mut().zip(&g.w2) {
            *wi -= self.eta * gi;
        }
        self.b2 -= self.eta * g.b2;
        let finite = self.w1.iter().chain(self.w2.iter()).all(|v| v.is_finite())
            && self.b1.is_finite()
            && self.b2.is_finite();
        if !finite {
            return Err(ModelError::NonFiniteGradient);
        }
        Ok(())
    }
}

/// Binary cross entropy with the predicted probability clamped into
/// `[P_FLOOR, 1 - P_FLOOR]`. Inputs meaningfully outside the unit interval
/// are rejected rather than silently clamped.
pub fn bce_loss(p: f64, y: bool) -> Result<f64, ModelError> {
    if !p.is_finite() || p < -1e-9 || p > 1.0 + 1e-9 {
        return Err(ModelError::ProbabilityOutOfRange(p));
    }
    let p = p.clamp(P_FLOOR, 1.0 - P_FLOOR);
    Ok(if y { -p.ln() } else { -(1.0 - p).ln() })
}
