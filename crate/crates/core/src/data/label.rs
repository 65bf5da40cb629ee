use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// The five coarse traffic classes: normal traffic plus the four attack
/// families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Normal,
    Dos,
    Probe,
    R2l,
    U2r,
}

impl ClassLabel {
    /// All five classes in canonical enumeration order.
    pub const ALL: [ClassLabel; 5] = [
        ClassLabel::Normal,
        ClassLabel::Dos,
        ClassLabel::Probe,
        ClassLabel::R2l,
        ClassLabel::U2r,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassLabel::Normal => "normal",
            ClassLabel::Dos => "dos",
            ClassLabel::Probe => "probe",
            ClassLabel::R2l => "r2l",
            ClassLabel::U2r => "u2r",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(ClassLabel::Normal),
            "dos" => Ok(ClassLabel::Dos),
            "probe" => Ok(ClassLabel::Probe),
            "r2l" => Ok(ClassLabel::R2l),
            "u2r" => Ok(ClassLabel::U2r),
            other => Err(DataError::UnmappedLabel(other.to_string())),
        }
    }
}

/// Policy for attack names that are missing from the mapping table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnmappedPolicy {
    /// Fail with an error naming the label (default).
    Error,
    /// Map unknown names to a fallback class.
    Fallback(ClassLabel),
}

impl Default for UnmappedPolicy {
    fn default() -> Self {
        UnmappedPolicy::Error
    }
}

/// Attack-name to coarse-class table, loaded from a plain-text file with one
/// `attack_name<TAB>category` pair per line. The assignment is a dataset fact
/// kept outside the code so it stays auditable and editable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackMapping {
    entries: HashMap<String, ClassLabel>,
    pub policy: UnmappedPolicy,
}

impl AttackMapping {
    /// Loads a mapping file. Blank lines and lines starting with `#` are
    /// skipped; categories must be one of `normal|dos|probe|r2l|u2r`.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let display = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: display.clone(),
            source,
        })?;
        Self::from_str_contents(&text, &display)
    }

    /// Parses mapping-file contents; `origin` names the source in errors.
    pub fn from_str_contents(text: &str, origin: &str) -> Result<Self, DataError> {
        let mut entries = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (name, category) = match (parts.next(), parts.next(), parts.next()) {
                (Some(n), Some(c), None) => (n.trim(), c.trim()),
                _ => {
                    return Err(DataError::BadMappingEntry {
                        path: origin.to_string(),
                        line: idx + 1,
                        reason: "expected `attack_name<TAB>category`".to_string(),
                    })
                }
            };
            let class = category
                .parse::<ClassLabel>()
                .map_err(|_| DataError::BadMappingEntry {
                    path: origin.to_string(),
                    line: idx + 1,
                    reason: format!("unknown category `{category}`"),
                })?;
            if entries.insert(name.to_ascii_lowercase(), class).is_some() {
                return Err(DataError::BadMappingEntry {
                    path: origin.to_string(),
                    line: idx + 1,
                    reason: format!("duplicate attack name `{name}`"),
                });
            }
        }
        if entries.is_empty() {
            return Err(DataError::EmptyFile {
                path: origin.to_string(),
            });
        }
        Ok(AttackMapping {
            entries,
            policy: UnmappedPolicy::Error,
        })
    }

    /// Builds a mapping from explicit pairs (primarily for tests and tools).
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, ClassLabel)>) -> Self {
        AttackMapping {
            entries: pairs
                .into_iter()
                .map(|(name, class)| (name.to_ascii_lowercase(), class))
                .collect(),
            policy: UnmappedPolicy::Error,
        }
    }

    pub fn with_policy(mut self, policy: UnmappedPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Maps a raw attack label to its coarse class. Lookup is
    /// case-insensitive and ignores a trailing `.`.
    pub fn map(&self, label: &str) -> Result<ClassLabel, DataError> {
        let key = label.trim().trim_end_matches('.').to_ascii_lowercase();
        match self.entries.get(&key) {
            Some(class) => Ok(*class),
            None => match self.policy {
                UnmappedPolicy::Error => Err(DataError::UnmappedLabel(label.to_string())),
                UnmappedPolicy::Fallback(class) => Ok(class),
            },
        }
    }

    /// Number of attack names in the table.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Attack names assigned to `class`, sorted.
    pub fn names_for(&self, class: ClassLabel) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .entries
            .iter()
            .filter(|(_, c)| **c == class)
            .map(|(n, _)| n.as_str())
            .collect();
        names.sort_unstable();
        names
    }
}
