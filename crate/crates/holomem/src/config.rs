//! Model configuration and recall policy.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How scan results are filtered into chunk-slot candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecallMethod {
    /// Keep the p highest-scoring tokens at each time step.
    TopP,
    /// Keep tokens whose similarity meets the time threshold.
    Threshold,
    /// Keep tokens meeting both criteria.
    Both,
}

impl fmt::Display for RecallMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RecallMethod::TopP => "top-p",
            RecallMethod::Threshold => "threshold",
            RecallMethod::Both => "both",
        };
        f.write_str(name)
    }
}

impl FromStr for RecallMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top-p" | "top_p" | "topp" => Ok(RecallMethod::TopP),
            "threshold" => Ok(RecallMethod::Threshold),
            "both" => Ok(RecallMethod::Both),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("unknown recall method {other:?} (expected top-p, threshold, or both)"),
            }),
        }
    }
}

/// Parameters of the whole-chunk recall pipeline. Settable globally in the
/// model configuration and overridable per request.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallPolicy {
    pub method: RecallMethod,
    /// Number of tokens kept per time step under top-p filtering.
    pub top_p: usize,
    /// Similarity floor (cosine units) for keeping a token at a time step.
    pub time_threshold: f64,
    /// Score floor passed to the chained retrievals.
    pub retrieval_threshold: f64,
}

impl Default for RecallPolicy {
    fn default() -> Self {
        Self {
            method: RecallMethod::Both,
            top_p: 8,
            time_threshold: 0.15,
            retrieval_threshold: 0.1,
        }
    }
}

/// Global model parameters, frozen into every snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Dimension of every holographic vector.
    pub dimension: usize,
    /// Master seed for all deterministic draws.
    pub seed: u64,
    /// Oscillator time scale S.
    pub time_scale: f64,
    /// Oscillator frequency-noise variance (sigma squared).
    pub frequency_variance: f64,
    /// Scale of the oscillator-selection distribution (beta).
    pub selection_scale: f64,
    /// Noise intensity: standard deviation of the retrieval score jitter,
    /// and the norm scale of the optional encoding noise. Zero disables both.
    pub noise_sd: f64,
    /// Default score floor for retrievals.
    pub retrieval_threshold: f64,
    /// Default whole-chunk recall policy.
    pub policy: RecallPolicy,
    /// Draw oscillator frequency noise around 1 instead of 0.
    pub recenter_frequencies: bool,
    /// Optional cap on the positional distance of encoded word pairs when
    /// ingesting sentences. None encodes all pairs.
    pub max_pair_distance: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dimension: 1024,
            seed: 0,
            time_scale: 1e-5,
            frequency_variance: 1.0,
            selection_scale: 5.125,
            noise_sd: 0.0,
            retrieval_threshold: 0.1,
            policy: RecallPolicy::default(),
            recenter_frequencies: false,
            max_pair_distance: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::InvalidDimension(self.dimension));
        }
        if !(self.time_scale > 0.0) || !self.time_scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "time_scale",
                reason: format!("must be a positive finite number, got {}", self.time_scale),
            });
        }
        if !(self.frequency_variance >= 0.0) || !self.frequency_variance.is_finite() {
            return Err(Error::InvalidParameter {
                name: "frequency_variance",
                reason: format!(
                    "must be a non-negative finite number, got {}",
                    self.frequency_variance
                ),
            });
        }
        if !(self.selection_scale > 0.0) || !self.selection_scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "selection_scale",
                reason: format!("must be a positive finite number, got {}", self.selection_scale),
            });
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::InvalidParameter {
                name: "noise_sd",
                reason: format!("must be a non-negative finite number, got {}", self.noise_sd),
            });
        }
        for (name, value) in [
            ("retrieval_threshold", self.retrieval_threshold),
            ("policy.time_threshold", self.policy.time_threshold),
            ("policy.retrieval_threshold", self.policy.retrieval_threshold),
        ] {
            if !(-1.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "threshold",
                    reason: format!("{name} must lie in [-1, 1], got {value}"),
                });
            }
        }
        if self.policy.top_p < 1 {
            return Err(Error::InvalidParameter {
                name: "policy.top_p",
                reason: "must be at least 1".to_string(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ModelConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_rejects_out_of_range_values() {
        let mut cfg = ModelConfig::default();
        cfg.dimension = 1;
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::default();
        cfg.time_scale = -1e-5;
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::default();
        cfg.policy.time_threshold = 1.5;
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::default();
        cfg.policy.top_p = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn method_parses_and_prints() {
        for (text, method) in [
            ("top-p", RecallMethod::TopP),
            ("threshold", RecallMethod::Threshold),
            ("both", RecallMethod::Both),
        ] {
            assert_eq!(text.parse::<RecallMethod>().unwrap(), method);
            assert_eq!(method.to_string().parse::<RecallMethod>().unwrap(), method);
        }
        assert!("topk".parse::<RecallMethod>().is_err());
    }
}
