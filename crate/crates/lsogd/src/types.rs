//! Core domain types shared by the learner, the controller, and the stream.

use serde::{Deserialize, Serialize};

/// One timestep of the two-modality stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Modality-1 feature vector (fixed dim d1 for a given stream).
    pub x1: Vec<f64>,
    /// Modality-2 feature vector (fixed dim d2 for a given stream).
    pub x2: Vec<f64>,
    /// Binary label.
    pub y: bool,
    /// Stream timestep the sample was drawn at.
    pub t: u64,
}

impl Sample {
    /// Label as a real target for loss arithmetic.
    pub fn target(&self) -> f64 {
        if self.y {
            1.0
        } else {
            0.0
        }
    }
}

/// Which of the two input modalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    M1,
    M2,
}

/// Output of the modality-suspicion comparison: the modality whose estimated
/// error exceeds the other's by more than the margin, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suspect {
    Modality1,
    Modality2,
    None,
}

/// The fusion coefficient on modality 1 (modality 2 carries `1 - alpha`).
///
/// Two parameterizations exist because the adaptation rules differ:
/// `Analytic` stores the effective weight directly and is updated by a
/// clipped proportional rule, so it can sit exactly on 0 or 1. `Sigmoid`
/// stores an unbounded raw value squashed through the logistic function, so
/// the effective weight is strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FusionWeight {
    Analytic { alpha: f64 },
    Sigmoid { raw: f64 },
}

impl FusionWeight {
    /// Analytic-mode weight, clipped into [0, 1].
    pub fn analytic(alpha: f64) -> Self {
        FusionWeight::Analytic {
            alpha: alpha.clamp(0.0, 1.0),
        }
    }

    /// Sigmoid-mode weight from the raw (pre-squash) parameter.
    pub fn sigmoid(raw: f64) -> Self {
        FusionWeight::Sigmoid { raw }
    }

    /// The effective coefficient applied to modality 1.
    pub fn effective(&self) -> f64 {
        match *self {
            FusionWeight::Analytic { alpha } => alpha,
            FusionWeight::Sigmoid { raw } => crate::model::sigmoid(raw),
        }
    }

    /// Raw parameter in sigmoid mode; the effective value otherwise.
    pub fn raw(&self) -> f64 {
        match *self {
            FusionWeight::Analytic { alpha } => alpha,
            FusionWeight::Sigmoid { raw } => raw,
        }
    }
}

/// Which fusion parameterization the controller adapts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    /// Clipped proportional update on the effective weight.
    #[default]
    Analytic,
    /// Fixed-step update on the raw logit of the weight.
    Sigmoid,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_effective_is_clipped() {
        assert_eq!(FusionWeight::analytic(1.7).effective(), 1.0);
        assert_eq!(FusionWeight::analytic(-0.2).effective(), 0.0);
        assert_eq!(FusionWeight::analytic(0.25).effective(), 0.25);
    }

    #[test]
    fn sigmoid_effective_strictly_interior() {
        // Up to f64 resolution; past |raw| ~ 36 the sigmoid rounds to 0/1.
        for raw in [-30.0, -1.0, 0.0, 3.0, 30.0] {
            let eff = FusionWeight::sigmoid(raw).effective();
            assert!(eff > 0.0 && eff < 1.0, "raw={raw} eff={eff}");
        }
        assert!((FusionWeight::sigmoid(0.0).effective() - 0.5).abs() < 1e-15);
    }
}
