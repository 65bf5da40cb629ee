use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::DataError;

/// Number of connection attributes per NSL-KDD record.
pub const ATTRIBUTE_COUNT: usize = 41;

/// The 41 NSL-KDD attribute names, in file order.
pub const ATTRIBUTE_NAMES: [&str; ATTRIBUTE_COUNT] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// One parsed NSL-KDD line: 41 raw attribute strings, the attack-name label
/// and the optional difficulty column some file variants carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub attributes: Vec<String>,
    pub label: String,
    pub difficulty: Option<u32>,
}

impl RawRecord {
    /// Index of a named attribute, or an error for unknown names.
    pub fn attribute_index(name: &str) -> Result<usize, DataError> {
        ATTRIBUTE_NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| DataError::UnknownAttribute(name.to_string()))
    }
}

/// Parses an NSL-KDD file: one record per line, comma-separated, 42 fields
/// (41 attributes + label) or 43 (plus difficulty). Empty lines are skipped;
/// file order is preserved.
pub fn parse_nslkdd(path: impl AsRef<Path>) -> Result<Vec<RawRecord>, DataError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: display.clone(),
        source,
    })?;
    parse_nslkdd_reader(file, &display)
}

/// Same as [`parse_nslkdd`] but over any reader; `origin` names the source in
/// error messages.
pub fn parse_nslkdd_reader(reader: impl Read, origin: &str) -> Result<Vec<RawRecord>, DataError> {
    let reader = BufReader::new(reader);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: origin.to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        let (label_idx, difficulty) = match fields.len() {
            42 => (41, None),
            43 => {
                // Difficulty column is parsed when well-formed and ignored
                // otherwise; the engine never consumes it.
                (41, fields[42].trim().parse::<u32>().ok())
            }
            n => {
                return Err(DataError::MalformedLine {
                    path: origin.to_string(),
                    line: idx + 1,
                    fields: n,
                })
            }
        };
        let attributes = fields[..ATTRIBUTE_COUNT]
            .iter()
            .map(|f| f.trim().to_string())
            .collect();
        // KDD'99-style labels carry a trailing dot; normalize it away.
        let label = fields[label_idx].trim().trim_end_matches('.').to_string();
        records.push(RawRecord {
            attributes,
            label,
            difficulty,
        });
    }
    if records.is_empty() {
        return Err(DataError::EmptyFile {
            path: origin.to_string(),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE_42: &str = "0,tcp,http,SF,215,45076,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,1,1,0.00,0.00,0.00,0.00,1.00,0.00,0.00,0,0,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,normal";
    const LINE_43: &str = "0,udp,private,SF,105,146,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1,1,0.00,0.00,0.00,0.00,1.00,0.00,0.00,255,254,1.00,0.01,0.00,0.00,0.00,0.00,0.00,0.00,snmpgetattack,18";

    #[test]
    fn parses_42_and_43_field_lines() {
        let input = format!("{LINE_42}\n{LINE_43}\n");
        let records = parse_nslkdd_reader(input.as_bytes(), "test").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].attributes.len(), 41);
        assert_eq!(records[0].label, "normal");
        assert_eq!(records[0].difficulty, None);
        assert_eq!(records[1].label, "snmpgetattack");
        assert_eq!(records[1].difficulty, Some(18));
    }

    #[test]
    fn preserves_file_order_and_skips_blank_lines() {
        let input = format!("\n{LINE_42}\n\n{LINE_43}\n\n");
        let records = parse_nslkdd_reader(input.as_bytes(), "test").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].label, "normal");
        assert_eq!(records[1].label, "snmpgetattack");
    }

    #[test]
    fn wrong_field_count_names_line_number() {
        let short = "0,tcp,http,SF,normal";
        let input = format!("{LINE_42}\n{short}\n");
        let err = parse_nslkdd_reader(input.as_bytes(), "test").unwrap_err();
        match err {
            DataError::MalformedLine { line, fields, .. } => {
                assert_eq!(line, 2);
                assert_eq!(fields, 5);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn forty_field_line_is_malformed() {
        // 39 attributes + label = 40 fields.
        let line: String = LINE_42.split(',').take(40).collect::<Vec<_>>().join(",");
        let err = parse_nslkdd_reader(line.as_bytes(), "test").unwrap_err();
        assert!(matches!(
            err,
            DataError::MalformedLine {
                line: 1,
                fields: 40,
                ..
            }
        ));
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = parse_nslkdd_reader("".as_bytes(), "test").unwrap_err();
        assert!(matches!(err, DataError::EmptyFile { .. }));
    }

    #[test]
    fn trailing_dot_labels_are_normalized() {
        let input = LINE_42.replace(",normal", ",normal.");
        let records = parse_nslkdd_reader(input.as_bytes(), "test").unwrap();
        assert_eq!(records[0].label, "normal");
    }

    #[test]
    fn attribute_index_lookup() {
        assert_eq!(RawRecord::attribute_index("duration").unwrap(), 0);
        assert_eq!(RawRecord::attribute_index("protocol_type").unwrap(), 1);
        assert_eq!(
            RawRecord::attribute_index("dst_host_srv_rerror_rate").unwrap(),
            40
        );
        assert!(RawRecord::attribute_index("no_such_attr").is_err());
    }
}
