use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::data::ClassLabel;
use crate::svm::{Kernel, SvmParams};

/// Kernel selection; the RBF width defaults to 1/dimension when no gamma is
/// configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    Linear,
    Rbf,
}

/// SOINN parameters shared by both polarities (the win caps come from
/// `n_pos` / `n_neg`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SoinnBaseConfig {
    pub age_max: u32,
    pub lambda: u64,
    pub neighbor_rate_divisor: f64,
}

impl Default for SoinnBaseConfig {
    fn default() -> Self {
        SoinnBaseConfig {
            age_max: 100,
            lambda: 100,
            neighbor_rate_divisor: 100.0,
        }
    }
}

/// SVM hyperparameters as configured (gamma optional).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: KernelChoice,
    /// RBF width; `None` resolves to 1/dimension at fit time.
    pub gamma: Option<f64>,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
    pub max_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kernel: KernelChoice::Rbf,
            gamma: None,
            kkt_tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 10_000,
        }
    }
}

/// Engine construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Classes in enumeration order; order fixes every tie-break.
    pub classes: Vec<ClassLabel>,
    /// Win cap of the fine (positive) networks.
    pub n_pos: u64,
    /// Win cap of the coarse (negative) networks.
    pub n_neg: u64,
    /// Candidate count for the pairwise refinement stage.
    pub m: usize,
    pub soinn: SoinnBaseConfig,
    pub svm: SvmConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            classes: ClassLabel::ALL.to_vec(),
            n_pos: 2,
            n_neg: 100,
            m: 3,
            soinn: SoinnBaseConfig::default(),
            svm: SvmConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let k = self.classes.len();
        if k < 2 {
            return Err(EngineError::TooFewClasses(k));
        }
        for (i, class) in self.classes.iter().enumerate() {
            if self.classes[i + 1..].contains(class) {
                return Err(EngineError::UnknownClass(*class));
            }
        }
        if self.n_pos >= self.n_neg {
            return Err(EngineError::BadPolarity {
                n_pos: self.n_pos,
                n_neg: self.n_neg,
            });
        }
        if self.m < 2 || self.m > k {
            return Err(EngineError::BadTopM { m: self.m, k });
        }
        Ok(())
    }

    /// SVM parameters with gamma resolved against the encoded dimension.
    pub fn resolved_svm_params(&self, dimension: usize) -> SvmParams {
        let kernel = match self.svm.kernel {
            KernelChoice::Linear => Kernel::Linear,
            KernelChoice::Rbf => Kernel::Rbf {
                gamma: self
                    .svm
                    .gamma
                    .unwrap_or_else(|| 1.0 / dimension.max(1) as f64),
            },
        };
        SvmParams {
            c: self.svm.c,
            kernel,
            kkt_tolerance: self.svm.kkt_tolerance,
            max_passes: self.svm.max_passes,
            max_iterations: self.svm.max_iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_matches_reference_setup() {
        let config = EngineConfig::default();
        assert_eq!(config.classes.len(), 5);
        assert_eq!(config.n_pos, 2);
        assert_eq!(config.n_neg, 100);
        assert_eq!(config.m, 3);
        config.validate().unwrap();
    }

    #[test]
    fn equal_win_caps_are_rejected() {
        let config = EngineConfig {
            n_pos: 100,
            n_neg: 100,
            ..EngineConfig::default()
        };
        assert!(matches!(
            config.validate(),
            Err(EngineError::BadPolarity {
                n_pos: 100,
                n_neg: 100
            })
        ));
    }

    #[test]
    fn minimal_two_class_engine_is_valid() {
        let config = EngineConfig {
            classes: vec![ClassLabel::Normal, ClassLabel::Dos],
            m: 2,
            ..EngineConfig::default()
        };
        config.validate().unwrap();
    }

    #[test]
    fn m_bounds_are_enforced() {
        let mut config = EngineConfig::default();
        config.m = 1;
        assert!(matches!(config.validate(), Err(EngineError::BadTopM { .. })));
        config.m = 6;
        assert!(matches!(config.validate(), Err(EngineError::BadTopM { .. })));
    }

    #[test]
    fn gamma_defaults_to_inverse_dimension() {
        let config = EngineConfig::default();
        match config.resolved_svm_params(125).kernel {
            Kernel::Rbf { gamma } => assert!((gamma - 1.0 / 125.0).abs() < 1e-15),
            other => panic!("unexpected kernel {other:?}"),
        }
        let config = EngineConfig {
            svm: SvmConfig {
                gamma: Some(0.25),
                ..SvmConfig::default()
            },
            ..EngineConfig::default()
        };
        match config.resolved_svm_params(125).kernel {
            Kernel::Rbf { gamma } => assert_eq!(gamma, 0.25),
            other => panic!("unexpected kernel {other:?}"),
        }
    }

    #[test]
    fn toml_round_trip_with_defaults() {
        let parsed: EngineConfig = toml::from_str("n_pos = 3\nn_neg = 50\n").unwrap();
        assert_eq!(parsed.n_pos, 3);
        assert_eq!(parsed.n_neg, 50);
        assert_eq!(parsed.m, 3);
        assert_eq!(parsed.soinn.age_max, 100);
    }
}
