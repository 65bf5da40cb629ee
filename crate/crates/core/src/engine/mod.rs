//! The composite detection engine: per-class SOINN pairs, one-vs-rest
//! binary SVMs over the exported node sets, top-m selection by decision
//! score, pairwise max-wins refinement, and failure-driven updates.

mod config;
mod snapshot;

pub use config::{EngineConfig, KernelChoice, SoinnBaseConfig, SvmConfig};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ClassLabel, DatasetSchema, LabeledSample};
use crate::soinn::{SoinnError, SoinnNetwork, SoinnParams};
use crate::svm::{pairwise_vote, smo_train, BinarySvmModel, PairwiseModel, SvmError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("positive win cap {n_pos} must be lower than negative win cap {n_neg}")]
    BadPolarity { n_pos: u64, n_neg: u64 },
    #[error("top-m count {m} must satisfy 2 <= m <= {k}")]
    BadTopM { m: usize, k: usize },
    #[error("engine needs at least 2 distinct classes, got {0}")]
    TooFewClasses(usize),
    #[error("class {0} is not configured on this engine")]
    UnknownClass(ClassLabel),
    #[error("initial training needs samples from at least 2 classes")]
    SingleClassTraining,
    #[error("class {0} has training data but an empty positive node set")]
    EmptyClassNodes(ClassLabel),
    #[error("engine has no fitted SVMs; train it first")]
    Unfitted,
    #[error("feature vector has dimension {got}, engine expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Soinn(#[from] SoinnError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot version {found} is not supported (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },
    #[error("snapshot is corrupted: {0}")]
    SnapshotCorrupted(String),
}

/// One class's model: the fine (low win cap) network fed with its own
/// traffic, the coarse (high win cap) one contributing negatives to other
/// classes, and the one-vs-rest SVM trained over the node sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub class: ClassLabel,
    pub positive: SoinnNetwork,
    pub negative: SoinnNetwork,
    pub binary_svm: Option<BinarySvmModel>,
}

impl ClassModel {
    fn has_data(&self) -> bool {
        self.positive.inputs_seen() > 0
    }
}

/// Verdict for one feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub final_class: ClassLabel,
    /// One-vs-rest decision score per configured class, in enumeration
    /// order; classes without a trained SVM score negative infinity.
    pub scores: Vec<f64>,
    /// The top-m candidate classes by descending score.
    pub top_m: Vec<ClassLabel>,
    /// Pairwise votes per candidate.
    pub votes: Vec<(ClassLabel, u32)>,
}

/// The n-SOINN-WTA-SVM composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEngine {
    config: EngineConfig,
    schema: DatasetSchema,
    class_models: Vec<ClassModel>,
    #[serde(with = "pairwise_serde")]
    pairwise: BTreeMap<(usize, usize), PairwiseModel>,
    seed: u64,
    cumulative_training_samples: u64,
}

mod pairwise_serde {
    use super::PairwiseModel;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        a: usize,
        b: usize,
        entry: PairwiseModel,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), PairwiseModel>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|((a, b), entry)| Entry {
                a: *a,
                b: *b,
                entry: entry.clone(),
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, usize), PairwiseModel>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|e| ((e.a, e.b), e.entry))
            .collect())
    }
}

// Per-task RNG seeds derive from the engine seed so parallel refits stay
// deterministic regardless of scheduling.
use crate::seed::derive as derive_seed;

impl DetectionEngine {
    /// Builds an empty engine: one SOINN pair per configured class, no SVMs.
    pub fn new(
        config: EngineConfig,
        schema: DatasetSchema,
        seed: u64,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        let dimension = schema.dimension;
        let class_models = config
            .classes
            .iter()
            .map(|class| {
                let base = SoinnParams {
                    win_cap: 0,
                    age_max: config.soinn.age_max,
                    lambda: config.soinn.lambda,
                    neighbor_rate_divisor: config.soinn.neighbor_rate_divisor,
                };
                ClassModel {
                    class: *class,
                    positive: SoinnNetwork::new(dimension, base.with_win_cap(config.n_pos)),
                    negative: SoinnNetwork::new(dimension, base.with_win_cap(config.n_neg)),
                    binary_svm: None,
                }
            })
            .collect();
        Ok(DetectionEngine {
            config,
            schema,
            class_models,
            pairwise: BTreeMap::new(),
            seed,
            cumulative_training_samples: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn class_models(&self) -> &[ClassModel] {
        &self.class_models
    }

    pub fn pairwise_models(&self) -> &BTreeMap<(usize, usize), PairwiseModel> {
        &self.pairwise
    }

    /// Samples ingested so far: initial training plus every fed-back
    /// failure.
    pub fn cumulative_training_samples(&self) -> u64 {
        self.cumulative_training_samples
    }

    /// Total node count across all SOINNs.
    pub fn total_nodes(&self) -> usize {
        self.class_models
            .iter()
            .map(|m| m.positive.node_count() + m.negative.node_count())
            .sum()
    }

    pub fn class_index(&self, class: ClassLabel) -> Option<usize> {
        self.config.classes.iter().position(|c| *c == class)
    }

    fn is_fitted(&self) -> bool {
        self.class_models.iter().any(|m| m.binary_svm.is_some())
    }

    fn ingest(&mut self, samples: &[LabeledSample]) -> Result<(), EngineError> {
        for sample in samples {
            let idx = self
                .class_index(sample.label)
                .ok_or(EngineError::UnknownClass(sample.label))?;
            let model = &mut self.class_models[idx];
            model.positive.process_input(&sample.features)?;
            model.negative.process_input(&sample.features)?;
        }
        self.cumulative_training_samples += samples.len() as u64;
        Ok(())
    }

    /// Initial supervised training: every sample feeds both SOINNs of its
    /// class, then the SVM layer is fit once.
    pub fn train_initial(&mut self, samples: &[LabeledSample]) -> Result<(), EngineError> {
        let mut seen: Vec<ClassLabel> = Vec::new();
        for s in samples {
            if !seen.contains(&s.label) {
                seen.push(s.label);
            }
        }
        if seen.len() < 2 {
            return Err(EngineError::SingleClassTraining);
        }
        self.ingest(samples)?;
        self.refit_svms()
    }

    /// Feeds confirmed misclassifications back into the true-class SOINN
    /// pairs and refits the SVM layer. A no-op on an empty list.
    pub fn update(&mut self, failed: &[LabeledSample]) -> Result<(), EngineError> {
        if failed.is_empty() {
            return Ok(());
        }
        self.ingest(failed)?;
        self.refit_svms()
    }

    /// Rebuilds every SVM from the current node sets: per class, positives
    /// come from its fine network and negatives from every other class's
    /// coarse network; pairwise models train fine nodes against fine nodes.
    /// Training sets, orientations and RNG salts follow canonical class
    /// order, so reordering the class enumeration never changes a model.
    pub fn refit_svms(&mut self) -> Result<(), EngineError> {
        let mut populated: Vec<usize> = (0..self.class_models.len())
            .filter(|i| self.class_models[*i].has_data())
            .collect();
        if populated.len() < 2 {
            return Err(EngineError::TooFewClasses(populated.len()));
        }
        for &i in &populated {
            if self.class_models[i].positive.node_count() == 0 {
                return Err(EngineError::EmptyClassNodes(self.class_models[i].class));
            }
        }
        populated.sort_by_key(|&i| self.class_models[i].class);
        let svm_params = self.config.resolved_svm_params(self.schema.dimension);
        let positive_nodes: Vec<Vec<Vec<f64>>> = self
            .class_models
            .iter()
            .map(|m| m.positive.export_nodes())
            .collect();
        let negative_nodes: Vec<Vec<Vec<f64>>> = self
            .class_models
            .iter()
            .map(|m| m.negative.export_nodes())
            .collect();

        // One-vs-rest models.
        let binary: Vec<(usize, BinarySvmModel)> = populated
            .par_iter()
            .map(|&i| {
                let mut set: Vec<(Vec<f64>, f64)> = positive_nodes[i]
                    .iter()
                    .map(|w| (w.clone(), 1.0))
                    .collect();
                for &j in &populated {
                    if j != i {
                        set.extend(negative_nodes[j].iter().map(|w| (w.clone(), -1.0)));
                    }
                }
                let salt = crate::seed::fnv1a(self.class_models[i].class.as_str());
                smo_train(&set, &svm_params, derive_seed(self.seed, salt)).map(|m| (i, m))
            })
            .collect::<Result<_, SvmError>>()?;

        // Pairwise models over fine node sets; the canonically smaller
        // class takes the positive side.
        let pairs: Vec<(usize, usize)> = populated
            .iter()
            .enumerate()
            .flat_map(|(pos, &i)| populated[pos + 1..].iter().map(move |&j| (i, j)))
            .collect();
        let pairwise: Vec<((usize, usize), PairwiseModel)> = pairs
            .par_iter()
            .map(|&(pos_idx, neg_idx)| {
                let mut set: Vec<(Vec<f64>, f64)> = positive_nodes[pos_idx]
                    .iter()
                    .map(|w| (w.clone(), 1.0))
                    .collect();
                set.extend(positive_nodes[neg_idx].iter().map(|w| (w.clone(), -1.0)));
                let a = crate::seed::fnv1a(self.class_models[pos_idx].class.as_str());
                let b = crate::seed::fnv1a(self.class_models[neg_idx].class.as_str());
                let salt = a.rotate_left(17).wrapping_add(b);
                let key = (pos_idx.min(neg_idx), pos_idx.max(neg_idx));
                smo_train(&set, &svm_params, derive_seed(self.seed, salt)).map(|model| {
                    (
                        key,
                        PairwiseModel {
                            model,
                            positive: pos_idx,
                        },
                    )
                })
            })
            .collect::<Result<_, SvmError>>()?;

        for model in &mut self.class_models {
            model.binary_svm = None;
        }
        for (i, model) in binary {
            self.class_models[i].binary_svm = Some(model);
        }
        self.pairwise = pairwise.into_iter().collect();
        Ok(())
    }

    /// Classifies one encoded feature vector. Pure: no engine state changes.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, EngineError> {
        if !self.is_fitted() {
            return Err(EngineError::Unfitted);
        }
        if x.len() != self.schema.dimension {
            return Err(EngineError::DimensionMismatch {
                expected: self.schema.dimension,
                got: x.len(),
            });
        }
        let mut scores = vec![f64::NEG_INFINITY; self.class_models.len()];
        for (idx, model) in self.class_models.iter().enumerate() {
            if let Some(svm) = &model.binary_svm {
                scores[idx] = svm.decision_value(x)?;
            }
        }
        let mut ranked: Vec<usize> = (0..scores.len())
            .filter(|i| scores[*i].is_finite())
            .collect();
        ranked.sort_by(|a, b| {
            scores[*b]
                .partial_cmp(&scores[*a])
                .unwrap()
                .then(a.cmp(b))
        });
        let take = self.config.m.min(ranked.len());
        let candidates: Vec<usize> = ranked[..take].to_vec();
        let candidate_scores: Vec<f64> = candidates.iter().map(|i| scores[*i]).collect();
        let outcome = pairwise_vote(&self.pairwise, &candidates, &candidate_scores, x)?;
        Ok(Prediction {
            final_class: self.config.classes[outcome.winner],
            scores,
            top_m: candidates
                .iter()
                .map(|i| self.config.classes[*i])
                .collect(),
            votes: outcome
                .tally
                .into_iter()
                .map(|(i, v)| (self.config.classes[i], v))
                .collect(),
        })
    }

    /// Batch prediction, parallel over records; order preserved.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Prediction>, EngineError> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }
}
