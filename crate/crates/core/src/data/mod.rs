//! NSL-KDD data layer: parsing, encoding schema, class mapping and splits.

mod label;
mod record;
mod schema;
mod split;

pub use label::{AttackMapping, ClassLabel, UnmappedPolicy};
pub use record::{parse_nslkdd, parse_nslkdd_reader, RawRecord, ATTRIBUTE_COUNT, ATTRIBUTE_NAMES};
pub use schema::{encode, encode_all, encode_features, fit_schema, AttributeSchema, DatasetSchema};
pub use split::{split_rounds, stratified_subsample};

use thiserror::Error;

/// Encoded feature vector of dimension `DatasetSchema::dimension`.
pub type FeatureVector = Vec<f64>;

/// An encoded record together with its coarse class label.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: ClassLabel,
}

/// Errors produced by the data layer.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected 42 or 43 comma-separated fields, found {fields}")]
    MalformedLine {
        path: String,
        line: usize,
        fields: usize,
    },
    #[error("{path}: file contains no records")]
    EmptyFile { path: String },
    #[error("cannot fit a schema on an empty record list")]
    EmptyRecords,
    #[error("attribute `{attribute}` (record {record}): non-numeric value `{value}`")]
    NonNumeric {
        attribute: String,
        record: usize,
        value: String,
    },
    #[error("unknown attribute name `{0}`")]
    UnknownAttribute(String),
    #[error("attack label `{0}` is not in the category mapping")]
    UnmappedLabel(String),
    #[error("{path}:{line}: bad mapping entry: {reason}")]
    BadMappingEntry {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("cannot split {len} records into {parts} parts")]
    BadSplit { len: usize, parts: usize },
    #[error("subsample of {requested} exceeds available {available} records")]
    BadSubsample { requested: usize, available: usize },
    #[error("record has {found} attributes, schema expects {expected}")]
    AttributeCountMismatch { found: usize, expected: usize },
}
