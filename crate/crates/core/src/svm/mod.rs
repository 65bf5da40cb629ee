//! Soft-margin kernel SVM trained by sequential minimal optimization.

mod kernel;
mod model;
mod smo;
mod vote;

pub use kernel::Kernel;
pub use model::{dual_objective, BinarySvmModel};
pub use smo::smo_train;
pub use vote::{pairwise_vote, PairwiseModel, VoteOutcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training set needs at least one sample of each sign")]
    SingleClassInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample {sample} has a non-finite feature at {index}")]
    NonFiniteFeature { sample: usize, index: usize },
    #[error("sample {sample} has label {label}; labels must be +1 or -1")]
    InvalidLabel { sample: usize, label: f64 },
    #[error("alpha {index} = {value} violates the box [0, {c}]")]
    BoxConstraintViolation { index: usize, value: f64, c: f64 },
    #[error("alphas length {alphas} does not match sample count {samples}")]
    AlphaCountMismatch { alphas: usize, samples: usize },
    #[error("no pairwise model for classes ({a}, {b})")]
    MissingPairwiseModel { a: usize, b: usize },
    #[error("empty candidate set")]
    NoCandidates,
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Box constraint on the dual variables.
    pub c: f64,
    pub kernel: Kernel,
    /// KKT slack tolerated before a variable counts as violating.
    pub kkt_tolerance: f64,
    /// Consecutive sweeps with no update required before declaring
    /// convergence.
    pub max_passes: usize,
    /// Hard cap on total sweeps.
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: Kernel::Rbf { gamma: 1.0 },
            kkt_tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 10_000,
        }
    }
}

impl SvmParams {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn validate(&self) {
        assert!(self.c > 0.0, "C must be positive");
        assert!(self.kkt_tolerance > 0.0, "kkt_tolerance must be positive");
        if let Kernel::Rbf { gamma } = self.kernel {
            assert!(gamma > 0.0, "gamma must be positive");
        }
    }
}
