use serde::{Deserialize, Serialize};

use super::{SvmError, SvmParams};

/// Trained binary classifier: support vectors with their signed dual
/// coefficients (αᵢ·yᵢ) and the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub params: SvmParams,
    pub dimension: usize,
    /// False when training stopped on the iteration cap instead of the KKT
    /// criterion.
    pub converged: bool,
}

impl BinarySvmModel {
    /// f(x) = Σ (αᵢyᵢ)·K(svᵢ, x) + b. The sign is the class, the magnitude
    /// the ranking score.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dimension {
            return Err(SvmError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let mut sum = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            sum += coef * self.params.kernel.eval(sv, x);
        }
        Ok(sum)
    }

    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }
}

/// Dual objective W(α) = Σαᵢ − ½ ΣΣ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ) for labeled samples
/// and a candidate α vector. Errors when α leaves the box [0, C].
pub fn dual_objective(
    samples: &[(Vec<f64>, f64)],
    alphas: &[f64],
    params: &SvmParams,
) -> Result<f64, SvmError> {
    if alphas.len() != samples.len() {
        return Err(SvmError::AlphaCountMismatch {
            alphas: alphas.len(),
            samples: samples.len(),
        });
    }
    for (index, alpha) in alphas.iter().enumerate() {
        if !(*alpha >= 0.0 && *alpha <= params.c) {
            return Err(SvmError::BoxConstraintViolation {
                index,
                value: *alpha,
                c: params.c,
            });
        }
    }
    let mut linear = 0.0;
    let mut quad = 0.0;
    for i in 0..samples.len() {
        if alphas[i] == 0.0 {
            continue;
        }
        linear += alphas[i];
        for j in 0..samples.len() {
            if alphas[j] == 0.0 {
                continue;
            }
            quad += alphas[i]
                * alphas[j]
                * samples[i].1
                * samples[j].1
                * params.kernel.eval(&samples[i].0, &samples[j].0);
        }
    }
    Ok(linear - 0.5 * quad)
}
