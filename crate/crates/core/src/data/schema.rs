use serde::{Deserialize, Serialize};

use super::{
    AttackMapping, DataError, FeatureVector, LabeledSample, RawRecord, ATTRIBUTE_COUNT,
    ATTRIBUTE_NAMES,
};

/// Per-attribute encoding rule fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributeSchema {
    /// Min-max scaled to [0,1]; values outside the fitted range are clamped.
    Numeric { min: f64, max: f64 },
    /// One-hot over the fitted vocabulary plus a trailing unknown slot for
    /// values never seen during fitting.
    Categorical { vocabulary: Vec<String> },
}

impl AttributeSchema {
    fn encoded_width(&self) -> usize {
        match self {
            AttributeSchema::Numeric { .. } => 1,
            AttributeSchema::Categorical { vocabulary } => vocabulary.len() + 1,
        }
    }
}

/// Fitted encoding schema for the 41 NSL-KDD attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub attributes: Vec<AttributeSchema>,
    /// Total encoded dimension: one slot per numeric attribute plus
    /// (vocabulary + unknown) per categorical attribute.
    pub dimension: usize,
}

impl DatasetSchema {
    /// Schema for one attribute by name.
    pub fn attribute(&self, name: &str) -> Result<&AttributeSchema, DataError> {
        Ok(&self.attributes[RawRecord::attribute_index(name)?])
    }

    /// Offset of an attribute's first encoded component.
    pub fn offset_of(&self, name: &str) -> Result<usize, DataError> {
        let idx = RawRecord::attribute_index(name)?;
        Ok(self.attributes[..idx]
            .iter()
            .map(AttributeSchema::encoded_width)
            .sum())
    }

    /// Serializes the schema as pretty JSON so encodings are reproducible
    /// across runs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Fits an encoding schema on training records. `categorical_attributes`
/// names the attributes to one-hot encode; pass `None` for the default
/// `{protocol_type, service, flag}`. Vocabularies are the sorted distinct
/// values observed; numeric ranges are the observed extremes.
pub fn fit_schema(
    records: &[RawRecord],
    categorical_attributes: Option<&[&str]>,
) -> Result<DatasetSchema, DataError> {
    if records.is_empty() {
        return Err(DataError::EmptyRecords);
    }
    let default_cats = ["protocol_type", "service", "flag"];
    let cats = categorical_attributes.unwrap_or(&default_cats);
    let mut is_categorical = [false; ATTRIBUTE_COUNT];
    for name in cats {
        is_categorical[RawRecord::attribute_index(name)?] = true;
    }

    let mut attributes = Vec::with_capacity(ATTRIBUTE_COUNT);
    for (idx, name) in ATTRIBUTE_NAMES.iter().enumerate() {
        if is_categorical[idx] {
            let mut vocabulary: Vec<String> = records
                .iter()
                .map(|r| r.attributes[idx].clone())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            vocabulary.sort_unstable();
            attributes.push(AttributeSchema::Categorical { vocabulary });
        } else {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for (rec_idx, record) in records.iter().enumerate() {
                let value = parse_numeric(&record.attributes[idx], name, rec_idx)?;
                min = min.min(value);
                max = max.max(value);
            }
            attributes.push(AttributeSchema::Numeric { min, max });
        }
    }
    let dimension = attributes.iter().map(AttributeSchema::encoded_width).sum();
    Ok(DatasetSchema {
        attributes,
        dimension,
    })
}

fn parse_numeric(value: &str, attribute: &str, record: usize) -> Result<f64, DataError> {
    let parsed: f64 = value.parse().map_err(|_| DataError::NonNumeric {
        attribute: attribute.to_string(),
        record: record + 1,
        value: value.to_string(),
    })?;
    if !parsed.is_finite() {
        return Err(DataError::NonNumeric {
            attribute: attribute.to_string(),
            record: record + 1,
            value: value.to_string(),
        });
    }
    Ok(parsed)
}

/// Encodes a record's attributes with a fitted schema: numerics min-max
/// scaled and clamped to [0,1] (constant columns encode to 0), categoricals
/// one-hot with unseen values on the unknown slot.
pub fn encode_features(
    record: &RawRecord,
    schema: &DatasetSchema,
) -> Result<FeatureVector, DataError> {
    if record.attributes.len() != schema.attributes.len() {
        return Err(DataError::AttributeCountMismatch {
            found: record.attributes.len(),
            expected: schema.attributes.len(),
        });
    }
    let mut features = Vec::with_capacity(schema.dimension);
    for (idx, attr) in schema.attributes.iter().enumerate() {
        let raw = &record.attributes[idx];
        match attr {
            AttributeSchema::Numeric { min, max } => {
                let value = parse_numeric(raw, ATTRIBUTE_NAMES[idx], 0)?;
                let scaled = if max > min {
                    ((value - min) / (max - min)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                features.push(scaled);
            }
            AttributeSchema::Categorical { vocabulary } => {
                let start = features.len();
                features.resize(start + vocabulary.len() + 1, 0.0);
                match vocabulary.binary_search(raw) {
                    Ok(pos) => features[start + pos] = 1.0,
                    Err(_) => features[start + vocabulary.len()] = 1.0,
                }
            }
        }
    }
    debug_assert_eq!(features.len(), schema.dimension);
    Ok(features)
}

/// Encodes a record and maps its attack label to a coarse class.
pub fn encode(
    record: &RawRecord,
    schema: &DatasetSchema,
    mapping: &AttackMapping,
) -> Result<LabeledSample, DataError> {
    let features = encode_features(record, schema)?;
    let label = mapping.map(&record.label)?;
    Ok(LabeledSample { features, label })
}

/// Encodes a batch, preserving order.
pub fn encode_all(
    records: &[RawRecord],
    schema: &DatasetSchema,
    mapping: &AttackMapping,
) -> Result<Vec<LabeledSample>, DataError> {
    records.iter().map(|r| encode(r, schema, mapping)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_nslkdd_reader, ClassLabel};

    fn record(attrs: &[&str], label: &str) -> RawRecord {
        RawRecord {
            attributes: attrs.iter().map(|s| s.to_string()).collect(),
            label: label.to_string(),
            difficulty: None,
        }
    }

    /// Synthetic records with controlled values in every column: numeric
    /// columns hold `base * scale`, categoricals cycle over small sets.
    fn toy_records(n: usize) -> Vec<RawRecord> {
        (0..n)
            .map(|i| {
                let attrs: Vec<String> = ATTRIBUTE_NAMES
                    .iter()
                    .enumerate()
                    .map(|(idx, name)| match *name {
                        "protocol_type" => ["tcp", "udp", "icmp"][i % 3].to_string(),
                        "service" => ["http", "smtp"][i % 2].to_string(),
                        "flag" => "SF".to_string(),
                        // constant column
                        "num_outbound_cmds" => "0".to_string(),
                        _ => format!("{}", (i * (idx + 1)) % 97),
                    })
                    .collect();
                RawRecord {
                    attributes: attrs,
                    label: if i % 2 == 0 { "normal" } else { "neptune" }.to_string(),
                    difficulty: None,
                }
            })
            .collect()
    }

    fn toy_mapping() -> AttackMapping {
        AttackMapping::from_pairs([
            ("normal".to_string(), ClassLabel::Normal),
            ("neptune".to_string(), ClassLabel::Dos),
        ])
    }

    #[test]
    fn dimension_matches_invariant() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        // 38 numeric + (3+1) protocol + (2+1) service + (1+1) flag
        assert_eq!(schema.dimension, 38 + 4 + 3 + 2);
        let width_sum: usize = schema.attributes.iter().map(|a| a.encoded_width()).sum();
        assert_eq!(schema.dimension, width_sum);
    }

    #[test]
    fn vocabularies_are_sorted_distinct() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        match schema.attribute("protocol_type").unwrap() {
            AttributeSchema::Categorical { vocabulary } => {
                assert_eq!(vocabulary, &["icmp", "tcp", "udp"]);
            }
            other => panic!("unexpected schema: {other:?}"),
        }
    }

    #[test]
    fn single_category_column_encodes_to_two_slots() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        match schema.attribute("flag").unwrap() {
            AttributeSchema::Categorical { vocabulary } => {
                assert_eq!(vocabulary.len(), 1);
            }
            other => panic!("unexpected schema: {other:?}"),
        }
        // value slot + unknown slot
        let offset = schema.offset_of("flag").unwrap();
        let sample = encode(&records[0], &schema, &toy_mapping()).unwrap();
        assert_eq!(sample.features[offset], 1.0);
        assert_eq!(sample.features[offset + 1], 0.0);
    }

    #[test]
    fn constant_numeric_column_has_min_equal_max_and_encodes_zero() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        match schema.attribute("num_outbound_cmds").unwrap() {
            AttributeSchema::Numeric { min, max } => assert_eq!(min, max),
            other => panic!("unexpected schema: {other:?}"),
        }
        let offset = schema.offset_of("num_outbound_cmds").unwrap();
        let sample = encode(&records[3], &schema, &toy_mapping()).unwrap();
        assert_eq!(sample.features[offset], 0.0);
    }

    #[test]
    fn numeric_at_schema_max_encodes_to_one() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        let (min, max) = match schema.attribute("duration").unwrap() {
            AttributeSchema::Numeric { min, max } => (*min, *max),
            other => panic!("unexpected schema: {other:?}"),
        };
        assert!(max > min);
        let mut rec = records[0].clone();
        rec.attributes[0] = format!("{max}");
        let sample = encode(&rec, &schema, &toy_mapping()).unwrap();
        assert_eq!(sample.features[0], 1.0);
    }

    #[test]
    fn out_of_range_numeric_is_clamped() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        let mut rec = records[0].clone();
        rec.attributes[0] = "1000000".to_string();
        let sample = encode(&rec, &schema, &toy_mapping()).unwrap();
        assert_eq!(sample.features[0], 1.0);
        rec.attributes[0] = "-5".to_string();
        let sample = encode(&rec, &schema, &toy_mapping()).unwrap();
        assert_eq!(sample.features[0], 0.0);
    }

    #[test]
    fn unseen_category_hits_unknown_slot() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        let mut rec = records[0].clone();
        let service_idx = RawRecord::attribute_index("service").unwrap();
        rec.attributes[service_idx] = "gopher".to_string();
        let sample = encode(&rec, &schema, &toy_mapping()).unwrap();
        let offset = schema.offset_of("service").unwrap();
        // vocabulary is {http, smtp}: slots [http, smtp, unknown]
        assert_eq!(
            &sample.features[offset..offset + 3],
            &[0.0, 0.0, 1.0],
            "unknown slot must carry the one-hot"
        );
    }

    #[test]
    fn non_numeric_token_in_numeric_column_errors() {
        let mut records = toy_records(4);
        records[2].attributes[0] = "fast".to_string();
        let err = fit_schema(&records, None).unwrap_err();
        match err {
            DataError::NonNumeric {
                attribute, record, ..
            } => {
                assert_eq!(attribute, "duration");
                assert_eq!(record, 3);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_record_list_errors() {
        assert!(matches!(
            fit_schema(&[], None),
            Err(DataError::EmptyRecords)
        ));
    }

    #[test]
    fn encode_is_idempotent_for_fixed_schema() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        let mapping = toy_mapping();
        for rec in &records {
            let a = encode(rec, &schema, &mapping).unwrap();
            let b = encode(rec, &schema, &mapping).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fitting_set_hits_both_scaling_endpoints() {
        let records = toy_records(12);
        let schema = fit_schema(&records, None).unwrap();
        let mapping = toy_mapping();
        let encoded: Vec<LabeledSample> = records
            .iter()
            .map(|r| encode(r, &schema, &mapping).unwrap())
            .collect();
        let mut offset = 0usize;
        for (idx, attr) in schema.attributes.iter().enumerate() {
            if let AttributeSchema::Numeric { min, max } = attr {
                if max > min {
                    let column: Vec<f64> = encoded.iter().map(|s| s.features[offset]).collect();
                    assert!(
                        column.iter().any(|v| *v == 0.0),
                        "attribute {} never hits 0",
                        ATTRIBUTE_NAMES[idx]
                    );
                    assert!(
                        column.iter().any(|v| *v == 1.0),
                        "attribute {} never hits 1",
                        ATTRIBUTE_NAMES[idx]
                    );
                }
            }
            offset += attr.encoded_width();
        }
    }

    #[test]
    fn golden_encode_of_first_training_line() {
        // Two fixed lines; schema fitted on both, first line hand-encoded.
        let input = "\
3,tcp,http,SF,100,200,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,10,20,0.50,0.10,0.00,0.00,0.00,0.00,0.00,0.00,normal
9,udp,smtp,S0,400,50,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,4,1,1.00,1.00,0.00,0.00,0.50,0.50,0.00,30,10,1.00,0.20,0.00,0.00,1.00,1.00,0.00,0.00,neptune";
        let records = parse_nslkdd_reader(input.as_bytes(), "golden").unwrap();
        let schema = fit_schema(&records, None).unwrap();
        let sample = encode(&records[0], &schema, &toy_mapping()).unwrap();

        // Hand-derived expectation: numerics scale by (v-min)/(max-min) over
        // the two lines; categoricals one-hot over sorted vocab + unknown.
        // duration: (3-3)/(9-3)=0
        // protocol_type vocab [tcp, udp] -> [1,0,0]
        // service vocab [http, smtp] -> [1,0,0]
        // flag vocab [S0, SF] -> [0,1,0]
        // src_bytes: (100-100)/300=0 ; dst_bytes: (200-50)/150=1
        let expected = vec![
            0.0, // duration
            1.0, 0.0, 0.0, // protocol_type
            1.0, 0.0, 0.0, // service
            0.0, 1.0, 0.0, // flag
            0.0, // src_bytes
            1.0, // dst_bytes
            0.0, // land (0,0 constant -> 0)
            0.0, // wrong_fragment
            0.0, // urgent
            0.0, // hot
            0.0, // num_failed_logins
            1.0, // logged_in (1 vs 0)
            0.0, // num_compromised
            0.0, // root_shell
            0.0, // su_attempted
            0.0, // num_root
            0.0, // num_file_creations
            0.0, // num_shells
            0.0, // num_access_files
            0.0, // num_outbound_cmds
            0.0, // is_host_login
            0.0, // is_guest_login
            0.0, // count (2 vs 4)
            1.0, // srv_count (2 vs 1)
            0.0, // serror_rate
            0.0, // srv_serror_rate
            0.0, // rerror_rate (constant)
            0.0, // srv_rerror_rate (constant)
            1.0, // same_srv_rate (1.0 vs 0.5)
            0.0, // diff_srv_rate
            0.0, // srv_diff_host_rate (constant)
            0.0, // dst_host_count (10 vs 30)
            1.0, // dst_host_srv_count (20 vs 10)
            0.0, // dst_host_same_srv_rate (0.5 vs 1.0)
            0.0, // dst_host_diff_srv_rate (0.1 vs 0.2)
            0.0, // dst_host_same_src_port_rate (constant)
            0.0, // dst_host_srv_diff_host_rate (constant)
            0.0, // dst_host_serror_rate (0 vs 1)
            0.0, // dst_host_srv_serror_rate (0 vs 1)
            0.0, // dst_host_rerror_rate (constant)
            0.0, // dst_host_srv_rerror_rate (constant)
        ];
        assert_eq!(sample.features, expected);
        assert_eq!(sample.label, ClassLabel::Normal);
    }

    #[test]
    fn schema_json_round_trip() {
        let records = toy_records(8);
        let schema = fit_schema(&records, None).unwrap();
        let json = schema.to_json();
        let back = DatasetSchema::from_json(&json).unwrap();
        assert_eq!(schema, back);
    }

    #[test]
    fn rejects_wrong_attribute_count() {
        let records = toy_records(4);
        let schema = fit_schema(&records, None).unwrap();
        let bad = record(&["1", "tcp"], "normal");
        assert!(matches!(
            encode_features(&bad, &schema),
            Err(DataError::AttributeCountMismatch { found: 2, .. })
        ));
    }
}
