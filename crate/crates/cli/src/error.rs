use std::fmt;
use std::path::Path;

use netsoinn::data::DataError;
use netsoinn::engine::EngineError;
use netsoinn::harness::HarnessError;

/// CLI error with its process exit code: 1 data, 2 config, 3 internal.
#[derive(Debug)]
pub enum CliError {
    Data(String),
    Config(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("i/o error on {}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(err: DataError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(err: EngineError) -> Self {
        match err {
            EngineError::BadPolarity { .. }
            | EngineError::BadTopM { .. }
            | EngineError::TooFewClasses(_) => CliError::Config(err.to_string()),
            EngineError::Io { .. }
            | EngineError::SnapshotVersion { .. }
            | EngineError::SnapshotCorrupted(_) => CliError::Data(err.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> Self {
        match err {
            HarnessError::Config(_) => CliError::Config(err.to_string()),
            HarnessError::Data(inner) => inner.into(),
            HarnessError::Engine(inner) => inner.into(),
            HarnessError::Io { .. } | HarnessError::DigestMismatch { .. } => {
                CliError::Data(err.to_string())
            }
            HarnessError::Json(_) => CliError::Data(err.to_string()),
            HarnessError::LengthMismatch { .. } | HarnessError::EmptyValidation
            | HarnessError::EmptyReports => CliError::Internal(err.to_string()),
        }
    }
}
