//! Engine persistence: a versioned JSON envelope carrying the full engine
//! state plus a SHA-256 checksum over the payload bytes.
//!
//! File layout:
//! ```json
//! {
//!   "version": 1,
//!   "sha256": "<hex digest of the payload bytes>",
//!   "payload": { ...engine state... }
//! }
//! ```
//! The payload holds the engine config, the fitted schema, every SOINN
//! network (params, nodes with ids/weights/wins, edges with ages), every
//! SVM model (params, support vectors, coefficients, bias), the seed and
//! the cumulative sample counter. Loading verifies the version, then the
//! checksum over the exact payload bytes, then deserializes; a loaded
//! engine predicts identically to the saved one.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use super::{DetectionEngine, EngineError};

/// Current snapshot format version.
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    version: u32,
    sha256: String,
    payload: &'a RawValue,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    version: u32,
    sha256: String,
    payload: Box<RawValue>,
}

fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl DetectionEngine {
    /// Writes the engine snapshot to `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EngineError> {
        let path = path.as_ref();
        let payload = serde_json::to_string(self)
            .map_err(|e| EngineError::SnapshotCorrupted(e.to_string()))?;
        let raw = RawValue::from_string(payload.clone())
            .map_err(|e| EngineError::SnapshotCorrupted(e.to_string()))?;
        let envelope = EnvelopeOut {
            version: SNAPSHOT_VERSION,
            sha256: digest_hex(payload.as_bytes()),
            payload: &raw,
        };
        let text = serde_json::to_string(&envelope)
            .map_err(|e| EngineError::SnapshotCorrupted(e.to_string()))?;
        fs::write(path, text).map_err(|source| EngineError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Reads a snapshot written by [`DetectionEngine::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EngineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EngineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let envelope: EnvelopeIn = serde_json::from_str(&text)
            .map_err(|e| EngineError::SnapshotCorrupted(e.to_string()))?;
        if envelope.version != SNAPSHOT_VERSION {
            return Err(EngineError::SnapshotVersion {
                found: envelope.version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let payload_bytes = envelope.payload.get().as_bytes();
        let found = digest_hex(payload_bytes);
        if found != envelope.sha256 {
            return Err(EngineError::SnapshotCorrupted(format!(
                "checksum mismatch: recorded {}, computed {}",
                envelope.sha256, found
            )));
        }
        serde_json::from_str(envelope.payload.get())
            .map_err(|e| EngineError::SnapshotCorrupted(e.to_string()))
    }
}
