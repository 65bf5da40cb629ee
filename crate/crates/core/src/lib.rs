//! Online incremental network-intrusion detection.
//!
//! The detection engine pairs two topology-learning networks (a fine-grained
//! "positive" one and a coarse "negative" one) per traffic class, trains a
//! one-vs-rest kernel SVM per class over the compressed node sets, picks the
//! top-m classes by decision score and refines the verdict with pairwise
//! max-wins voting. Only misclassified samples are fed back, so the model
//! improves online while ingesting a fraction of the traffic it sees.
//!
//! Modules:
//! - [`data`]: NSL-KDD parsing, schema fitting, one-hot/min-max encoding,
//!   attack-name to class mapping, round splitting.
//! - [`soinn`]: the streaming topology-learning clusterer with the win-cap
//!   extension and squared-Euclidean distances.
//! - [`svm`]: soft-margin kernel SVM trained by sequential minimal
//!   optimization, plus pairwise max-wins voting.
//! - [`engine`]: the composite detector with snapshot persistence.
//! - [`harness`]: the initial-training / test-then-feed-back round protocol,
//!   the offline batch baseline and report emission.
//! - [`synth`]: deterministic generator of NSL-KDD-format benchmark files.

pub mod data;
pub mod engine;
pub mod harness;
mod seed;
pub mod soinn;
pub mod svm;
pub mod synth;

pub use data::{
    AttackMapping, ClassLabel, DataError, DatasetSchema, FeatureVector, LabeledSample, RawRecord,
};
pub use engine::{DetectionEngine, EngineConfig, EngineError, Prediction};
pub use harness::{ExperimentConfig, HarnessError, RoundReport};
pub use soinn::{SoinnNetwork, SoinnParams};
pub use svm::{BinarySvmModel, Kernel, SvmError, SvmParams};
