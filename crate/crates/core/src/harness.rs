//! The experiment protocol: initial training, test-then-feed-back rounds,
//! the offline batch baseline, and report emission.
//!
//! Round 0 trains the engine on the initial set and previews it on the
//! first round subset. Each round i then predicts subset i with the current
//! model, reports that accuracy, and feeds only the failed samples back.
//! Cumulative sample counts follow the recurrence
//! `cumulative(i) = initial + Σ_{j<=i} failures(j)`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{
    encode, fit_schema, parse_nslkdd, split_rounds, stratified_subsample, AttackMapping,
    ClassLabel, DataError, DatasetSchema, LabeledSample,
};
use crate::engine::{DetectionEngine, EngineConfig, EngineError, Prediction};
use crate::seed;

const SALT_INITIAL_SUBSAMPLE: u64 = 1;
const SALT_ROUND_SUBSAMPLE: u64 = 2;
const SALT_SPLIT: u64 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("config error: {0}")]
    Config(String),
    #[error("validation inputs differ in length: {predictions} predictions vs {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("validation inputs are empty")]
    EmptyValidation,
    #[error("no reports to emit")]
    EmptyReports,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("training-multiset digest mismatch: recorded {recorded}, computed {computed}")]
    DigestMismatch { recorded: String, computed: String },
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct DataSection {
    /// NSL-KDD file used for schema fitting and initial training.
    pub initial_path: String,
    /// NSL-KDD file split into the round subsets.
    pub rounds_path: String,
    /// Attack-name to category mapping file.
    pub mapping_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    /// Number of test-then-feed-back rounds.
    pub rounds: usize,
    pub seed: u64,
    /// Shuffle before splitting the round subsets (default: contiguous in
    /// file order).
    pub shuffle: bool,
    /// Stratified subsample size for the initial set (desk-scale runs).
    pub initial_subsample: Option<usize>,
    /// Stratified subsample size per round subset (desk-scale runs).
    pub round_subsample: Option<usize>,
    /// Write `time_s` as zero in reports so two runs with the same seed
    /// emit byte-identical files.
    pub zero_times: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            rounds: 5,
            seed: 0,
            shuffle: false,
            initial_subsample: None,
            round_subsample: None,
            zero_times: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportSection {
    pub format: ReportFormat,
    pub out_dir: String,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            format: ReportFormat::Both,
            out_dir: "out".to_string(),
        }
    }
}

/// Full experiment configuration; mirrors the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub experiment: ExperimentSection,
    pub engine: EngineConfig,
    pub report: ReportSection,
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.experiment.rounds == 0 {
            return Err(HarnessError::Config(
                "experiment.rounds must be at least 1".to_string(),
            ));
        }
        for (name, value) in [
            ("data.initial_path", &self.data.initial_path),
            ("data.rounds_path", &self.data.rounds_path),
            ("data.mapping_path", &self.data.mapping_path),
        ] {
            if value.is_empty() {
                return Err(HarnessError::Config(format!("{name} must not be empty")));
            }
        }
        self.engine
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Data preparation

/// Parsed, subsampled, encoded experiment inputs.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub schema: DatasetSchema,
    pub mapping: AttackMapping,
    pub initial: Vec<LabeledSample>,
    pub rounds: Vec<Vec<LabeledSample>>,
    /// Records made available to the experiment (initial plus all round
    /// subsets); denominates `fraction_of_total`.
    pub total_available: usize,
}

/// Loads the dataset files, applies the configured stratified subsampling,
/// fits the schema on the initial set only, encodes everything and splits
/// the round subsets.
pub fn prepare_experiment_data(config: &ExperimentConfig) -> Result<ExperimentData, HarnessError> {
    config.validate()?;
    let mapping = AttackMapping::from_path(&config.data.mapping_path)?;
    let mut initial_records = parse_nslkdd(&config.data.initial_path)?;
    let mut round_records = parse_nslkdd(&config.data.rounds_path)?;
    let exp = &config.experiment;

    if let Some(size) = exp.initial_subsample {
        if size > initial_records.len() {
            return Err(HarnessError::Config(format!(
                "initial_subsample {size} exceeds initial file size {}",
                initial_records.len()
            )));
        }
        initial_records = stratified_subsample(
            &initial_records,
            &mapping,
            size,
            seed::derive(exp.seed, SALT_INITIAL_SUBSAMPLE),
        )?;
    }
    if let Some(size) = exp.round_subsample {
        let wanted = size * exp.rounds;
        if wanted > round_records.len() {
            return Err(HarnessError::Config(format!(
                "round_subsample {size} x {} rounds exceeds rounds file size {}",
                exp.rounds,
                round_records.len()
            )));
        }
        round_records = stratified_subsample(
            &round_records,
            &mapping,
            wanted,
            seed::derive(exp.seed, SALT_ROUND_SUBSAMPLE),
        )?;
    }

    let schema = fit_schema(&initial_records, None)?;
    let initial: Vec<LabeledSample> = initial_records
        .iter()
        .map(|r| encode(r, &schema, &mapping))
        .collect::<Result<_, _>>()?;
    let split_seed = exp.shuffle.then(|| seed::derive(exp.seed, SALT_SPLIT));
    let subsets = split_rounds(&round_records, exp.rounds, split_seed)?;
    let rounds: Vec<Vec<LabeledSample>> = subsets
        .iter()
        .map(|subset| {
            subset
                .iter()
                .map(|r| encode(r, &schema, &mapping))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let total_available = initial.len() + rounds.iter().map(Vec::len).sum::<usize>();
    Ok(ExperimentData {
        schema,
        mapping,
        initial,
        rounds,
        total_available,
    })
}

// ---------------------------------------------------------------------------
// Validation

/// Accuracy percent plus the indices of failed predictions, in order.
pub fn validate(
    predictions: &[Prediction],
    truths: &[ClassLabel],
) -> Result<(f64, Vec<usize>), HarnessError> {
    if predictions.len() != truths.len() {
        return Err(HarnessError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(HarnessError::EmptyValidation);
    }
    let failed: Vec<usize> = predictions
        .iter()
        .zip(truths)
        .enumerate()
        .filter(|(_, (p, t))| p.final_class != **t)
        .map(|(i, _)| i)
        .collect();
    let correct = predictions.len() - failed.len();
    let accuracy = 100.0 * correct as f64 / predictions.len() as f64;
    Ok((accuracy, failed))
}

// ---------------------------------------------------------------------------
// Reports and digests

/// One row of the experiment: round 0 is initial training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub accuracy_pct: f64,
    pub time_s: f64,
    pub cumulative_samples: u64,
    pub failures: usize,
    /// Rows are true classes, columns predicted, in engine class order.
    pub confusion: Vec<Vec<u64>>,
}

/// Record of exactly which samples the online run trained on, with a
/// digest of the multiset for cross-checking the offline baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDigest {
    pub sha256: String,
    pub initial_count: usize,
    /// Per round, the indices (into that round's subset) that failed and
    /// were fed back.
    pub failed_indices: Vec<Vec<usize>>,
}

impl TrainingDigest {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Order-free digest of a training multiset.
pub fn multiset_digest<'a>(samples: impl IntoIterator<Item = &'a LabeledSample>) -> String {
    let mut encoded: Vec<Vec<u8>> = samples
        .into_iter()
        .map(|s| {
            let mut bytes = Vec::with_capacity(8 * s.features.len() + 8);
            bytes.extend_from_slice(s.label.as_str().as_bytes());
            bytes.push(0);
            for v in &s.features {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            bytes
        })
        .collect();
    encoded.sort_unstable();
    let mut hasher = Sha256::new();
    hasher.update((encoded.len() as u64).to_le_bytes());
    for e in &encoded {
        hasher.update((e.len() as u64).to_le_bytes());
        hasher.update(e);
    }
    hex::encode(hasher.finalize())
}

fn confusion_matrix(
    engine: &DetectionEngine,
    predictions: &[Prediction],
    truths: &[ClassLabel],
) -> Vec<Vec<u64>> {
    let k = engine.config().classes.len();
    let mut matrix = vec![vec![0u64; k]; k];
    for (pred, truth) in predictions.iter().zip(truths) {
        let (Some(t), Some(p)) = (
            engine.class_index(*truth),
            engine.class_index(pred.final_class),
        ) else {
            continue;
        };
        matrix[t][p] += 1;
    }
    matrix
}

// ---------------------------------------------------------------------------
// Online run

#[derive(Debug)]
pub struct OnlineOutcome {
    pub reports: Vec<RoundReport>,
    pub engine: DetectionEngine,
    pub digest: TrainingDigest,
}

fn predict_subset(
    engine: &DetectionEngine,
    subset: &[LabeledSample],
) -> Result<Vec<Prediction>, EngineError> {
    subset
        .par_iter()
        .map(|s| engine.predict(&s.features))
        .collect()
}

/// Runs initial training plus the configured feed-back rounds.
pub fn run_online(
    config: &ExperimentConfig,
    data: &ExperimentData,
) -> Result<OnlineOutcome, HarnessError> {
    let exp = &config.experiment;
    let mut reports = Vec::with_capacity(exp.rounds + 1);
    let mut failed_indices: Vec<Vec<usize>> = Vec::with_capacity(exp.rounds);

    let started = Instant::now();
    let mut engine =
        DetectionEngine::new(config.engine.clone(), data.schema.clone(), exp.seed)?;
    engine.train_initial(&data.initial)?;
    // Preview the fresh model on the first round subset; nothing is fed
    // back here, so the cumulative count stays at the initial size.
    let preview = &data.rounds[0];
    let predictions = predict_subset(&engine, preview)?;
    let truths: Vec<ClassLabel> = preview.iter().map(|s| s.label).collect();
    let (accuracy, failed) = validate(&predictions, &truths)?;
    reports.push(RoundReport {
        round: 0,
        accuracy_pct: accuracy,
        time_s: started.elapsed().as_secs_f64(),
        cumulative_samples: engine.cumulative_training_samples(),
        failures: failed.len(),
        confusion: confusion_matrix(&engine, &predictions, &truths),
    });

    for round in 1..=exp.rounds {
        let subset = &data.rounds[round - 1];
        let started = Instant::now();
        let predictions = predict_subset(&engine, subset)?;
        let truths: Vec<ClassLabel> = subset.iter().map(|s| s.label).collect();
        let (accuracy, failed) = validate(&predictions, &truths)?;
        let failed_samples: Vec<LabeledSample> =
            failed.iter().map(|&i| subset[i].clone()).collect();
        // Only failures may reach the update path.
        assert!(
            failed_samples.len() == failed.len()
                && failed.iter().all(|&i| predictions[i].final_class != truths[i]),
            "update fed a sample that did not fail"
        );
        engine.update(&failed_samples)?;
        reports.push(RoundReport {
            round,
            accuracy_pct: accuracy,
            time_s: started.elapsed().as_secs_f64(),
            cumulative_samples: engine.cumulative_training_samples(),
            failures: failed.len(),
            confusion: confusion_matrix(&engine, &predictions, &truths),
        });
        failed_indices.push(failed);
    }

    let trained: Vec<&LabeledSample> = data
        .initial
        .iter()
        .chain(
            failed_indices
                .iter()
                .zip(&data.rounds)
                .flat_map(|(failed, subset)| failed.iter().map(|&i| &subset[i])),
        )
        .collect();
    let digest = TrainingDigest {
        sha256: multiset_digest(trained),
        initial_count: data.initial.len(),
        failed_indices,
    };
    Ok(OnlineOutcome {
        reports,
        engine,
        digest,
    })
}

// ---------------------------------------------------------------------------
// Offline baseline

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineEvalRow {
    pub eval_set: String,
    pub accuracy_pct: f64,
    pub time_s: f64,
    pub samples: usize,
}

#[derive(Debug)]
pub struct OfflineOutcome {
    pub training_samples: usize,
    pub train_time_s: f64,
    pub evals: Vec<OfflineEvalRow>,
    pub engine: DetectionEngine,
}

/// Trains a fresh engine in one batch on exactly the multiset the online
/// run consumed (verified against the digest) and evaluates it on the
/// union of the round subsets and on the final subset.
pub fn run_offline(
    config: &ExperimentConfig,
    data: &ExperimentData,
    digest: &TrainingDigest,
) -> Result<OfflineOutcome, HarnessError> {
    if digest.failed_indices.len() != data.rounds.len() {
        return Err(HarnessError::Config(format!(
            "digest covers {} rounds but the experiment has {}",
            digest.failed_indices.len(),
            data.rounds.len()
        )));
    }
    if digest.initial_count != data.initial.len() {
        return Err(HarnessError::Config(format!(
            "digest initial count {} does not match prepared data {}",
            digest.initial_count,
            data.initial.len()
        )));
    }
    let mut multiset: Vec<LabeledSample> = data.initial.clone();
    for (failed, subset) in digest.failed_indices.iter().zip(&data.rounds) {
        for &idx in failed {
            let sample = subset.get(idx).ok_or_else(|| {
                HarnessError::Config(format!("failed index {idx} out of subset bounds"))
            })?;
            multiset.push(sample.clone());
        }
    }
    let computed = multiset_digest(multiset.iter());
    if computed != digest.sha256 {
        return Err(HarnessError::DigestMismatch {
            recorded: digest.sha256.clone(),
            computed,
        });
    }

    let started = Instant::now();
    let mut engine = DetectionEngine::new(
        config.engine.clone(),
        data.schema.clone(),
        config.experiment.seed,
    )?;
    engine.train_initial(&multiset)?;
    let train_time_s = started.elapsed().as_secs_f64();

    let mut evals = Vec::new();
    let union: Vec<LabeledSample> = data.rounds.iter().flatten().cloned().collect();
    for (name, set) in [
        ("round_subsets_union", &union),
        ("final_round_subset", data.rounds.last().unwrap()),
    ] {
        let started = Instant::now();
        let predictions = predict_subset(&engine, set)?;
        let truths: Vec<ClassLabel> = set.iter().map(|s| s.label).collect();
        let (accuracy, _) = validate(&predictions, &truths)?;
        evals.push(OfflineEvalRow {
            eval_set: name.to_string(),
            accuracy_pct: accuracy,
            time_s: started.elapsed().as_secs_f64(),
            samples: set.len(),
        });
    }
    Ok(OfflineOutcome {
        training_samples: multiset.len(),
        train_time_s,
        evals,
        engine,
    })
}

// ---------------------------------------------------------------------------
// Emission

fn fraction_of_total(report: &RoundReport, total: usize) -> f64 {
    report.cumulative_samples as f64 / total.max(1) as f64
}

/// Tabular rendering: exactly the columns
/// `round,accuracy_pct,time_s,cumulative_samples,failures` plus the derived
/// `fraction_of_total`.
pub fn render_csv(reports: &[RoundReport], total: usize, zero_times: bool) -> String {
    let mut out = String::from("round,accuracy_pct,time_s,cumulative_samples,failures,fraction_of_total\n");
    for r in reports {
        let time = if zero_times { 0.0 } else { r.time_s };
        out.push_str(&format!(
            "{},{:.4},{:.3},{},{},{:.6}\n",
            r.round,
            r.accuracy_pct,
            time,
            r.cumulative_samples,
            r.failures,
            fraction_of_total(r, total)
        ));
    }
    out
}

#[derive(Serialize)]
struct JsonRound<'a> {
    round: usize,
    accuracy_pct: f64,
    time_s: f64,
    cumulative_samples: u64,
    failures: usize,
    fraction_of_total: f64,
    confusion: &'a [Vec<u64>],
}

/// Machine-readable rendering with the same columns plus the confusion
/// matrices.
pub fn render_json(reports: &[RoundReport], total: usize, zero_times: bool) -> String {
    let rows: Vec<JsonRound> = reports
        .iter()
        .map(|r| JsonRound {
            round: r.round,
            accuracy_pct: r.accuracy_pct,
            time_s: if zero_times { 0.0 } else { r.time_s },
            cumulative_samples: r.cumulative_samples,
            failures: r.failures,
            fraction_of_total: fraction_of_total(r, total),
            confusion: &r.confusion,
        })
        .collect();
    let doc = serde_json::json!({
        "total_dataset_size": total,
        "rounds": rows,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

/// Writes the report in the requested format(s); returns the paths written.
pub fn emit_report(
    reports: &[RoundReport],
    format: ReportFormat,
    dir: impl AsRef<Path>,
    basename: &str,
    total: usize,
    zero_times: bool,
) -> Result<Vec<PathBuf>, HarnessError> {
    if reports.is_empty() {
        return Err(HarnessError::EmptyReports);
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    let mut write = |name: String, contents: String| -> Result<(), HarnessError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        written.push(path);
        Ok(())
    };
    if matches!(format, ReportFormat::Csv | ReportFormat::Both) {
        write(
            format!("{basename}.csv"),
            render_csv(reports, total, zero_times),
        )?;
    }
    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        write(
            format!("{basename}.json"),
            render_json(reports, total, zero_times),
        )?;
    }
    Ok(written)
}

/// Renders the offline baseline rows (same column style as the round
/// table).
pub fn render_offline_csv(outcome: &OfflineOutcome, zero_times: bool) -> String {
    let mut out = String::from("eval_set,accuracy_pct,time_s,samples\n");
    for row in &outcome.evals {
        let time = if zero_times { 0.0 } else { row.time_s };
        out.push_str(&format!(
            "{},{:.4},{:.3},{}\n",
            row.eval_set, row.accuracy_pct, time, row.samples
        ));
    }
    out
}

pub fn render_offline_json(outcome: &OfflineOutcome, zero_times: bool) -> String {
    let doc = serde_json::json!({
        "training_samples": outcome.training_samples,
        "train_time_s": if zero_times { 0.0 } else { outcome.train_time_s },
        "evals": outcome.evals.iter().map(|r| serde_json::json!({
            "eval_set": r.eval_set,
            "accuracy_pct": r.accuracy_pct,
            "time_s": if zero_times { 0.0 } else { r.time_s },
            "samples": r.samples,
        })).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}
