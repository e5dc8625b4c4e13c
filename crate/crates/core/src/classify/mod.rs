//! Commit classification into maintenance activities.
//!
//! Three classifier families are provided: trivial baselines (zero-rule
//! majority class and a keyword rule), joint-conditional-density chain
//! models of order 0..=3, and a discrete hidden Markov model. Evaluation
//! reports accuracy, Cohen's kappa, and the full confusion matrix.

mod baseline;
mod chains;
mod hmm;
mod jcd;
mod metrics;

pub use baseline::{keyword_rule, zero_rule_fit, KeywordRuleConfig, ZeroRule};
pub use chains::{build_chains, CommitChain, LabeledChain};
pub use hmm::DiscreteHMM;
pub use jcd::{fit_jcd, predict_jcd, JCDModel};
pub use metrics::{evaluate, ClassifierMetrics};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mining::{CommitRecord, MiningError};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("unknown schema field {0:?}")]
    SchemaFieldUnknown(String),
    #[error("class {class:?} has only {count} training examples (need >= 3)")]
    InsufficientData { class: Activity, count: usize },
    #[error("chain length {chain_len} does not exceed model order {order}")]
    OrderMismatch { chain_len: usize, order: usize },
    #[error("model order {0} unsupported (0..=3)")]
    UnsupportedOrder(usize),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("observation {index} outside alphabet of size {alphabet}")]
    InvalidObservation { index: usize, alphabet: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("chain link broken at commit {at}")]
    ChainLinkBroken { at: String },
    #[error("merge commit {id} cannot be part of a chain")]
    MergeInChain { id: String },
    #[error("invalid activity label {0:?}")]
    InvalidLabel(String),
    #[error(transparent)]
    Dataset(#[from] MiningError),
}

/// The three maintenance activities, in fixed tie-breaking order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Activity {
    Adaptive,
    Corrective,
    Perfective,
}

impl Activity {
    pub const ALL: [Activity; 3] = [Activity::Adaptive, Activity::Corrective, Activity::Perfective];

    pub fn index(self) -> usize {
        match self {
            Activity::Adaptive => 0,
            Activity::Corrective => 1,
            Activity::Perfective => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn short_label(self) -> &'static str {
        match self {
            Activity::Adaptive => "a",
            Activity::Corrective => "c",
            Activity::Perfective => "p",
        }
    }

    /// Accepts the short labels {a, c, p} and the full names.
    pub fn parse(s: &str) -> Result<Self, ClassifyError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "adaptive" => Ok(Activity::Adaptive),
            "c" | "corrective" => Ok(Activity::Corrective),
            "p" | "perfective" => Ok(Activity::Perfective),
            other => Err(ClassifyError::InvalidLabel(other.to_string())),
        }
    }
}

impl std::fmt::Display for Activity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Activity::Adaptive => "adaptive",
            Activity::Corrective => "corrective",
            Activity::Perfective => "perfective",
        };
        write!(f, "{name}")
    }
}

/// One feature column: a display name plus the record field it reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub source: String,
}

impl FeatureSpec {
    pub fn same(name: &str) -> Self {
        Self {
            name: name.to_string(),
            source: name.to_string(),
        }
    }
}

/// Ordered feature schema over commit-record fields.
///
/// Valid sources are the numeric record fields, `sojourn_seconds`
/// (absent maps to 0), the companion indicator `sojourn_present`, and
/// `kw:<keyword>` for keyword counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub fields: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn new(fields: Vec<FeatureSpec>) -> Self {
        Self { fields }
    }

    pub fn from_sources(sources: &[&str]) -> Self {
        Self {
            fields: sources.iter().map(|s| FeatureSpec::same(s)).collect(),
        }
    }

    /// Schema used by the CLI when none is configured.
    pub fn default_schema() -> Self {
        Self::from_sources(&[
            "density",
            "lines_added_net",
            "lines_deleted_net",
            "files_added_gross",
            "files_modified_gross",
            "files_deleted_gross",
            "sojourn_seconds",
            "sojourn_present",
            "kw:fix",
            "kw:add",
            "kw:refactor",
        ])
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.name.as_str()).collect()
    }
}

/// Extract the schema's feature vector from one (non-merge) commit.
pub fn featurize(record: &CommitRecord, schema: &FeatureSchema) -> Result<Vec<f64>, ClassifyError> {
    schema
        .fields
        .iter()
        .map(|spec| extract_field(record, &spec.source))
        .collect()
}

fn extract_field(record: &CommitRecord, source: &str) -> Result<f64, ClassifyError> {
    if let Some(keyword) = source.strip_prefix("kw:") {
        return Ok(record.keyword_count(keyword) as f64);
    }
    let value = match source {
        "density" => record.density,
        "lines_added_gross" => record.lines_added_gross as f64,
        "lines_deleted_gross" => record.lines_deleted_gross as f64,
        "lines_added_net" => record.lines_added_net as f64,
        "lines_deleted_net" => record.lines_deleted_net as f64,
        "files_added_gross" => record.files_added_gross as f64,
        "files_modified_gross" => record.files_modified_gross as f64,
        "files_deleted_gross" => record.files_deleted_gross as f64,
        "files_renamed_gross" => record.files_renamed_gross as f64,
        "files_added_net" => record.files_added_net as f64,
        "files_modified_net" => record.files_modified_net as f64,
        "files_deleted_net" => record.files_deleted_net as f64,
        "files_renamed_net" => record.files_renamed_net as f64,
        "sojourn_seconds" => record.sojourn_seconds.unwrap_or(0) as f64,
        "sojourn_present" => {
            if record.sojourn_seconds.is_some() {
                1.0
            } else {
                0.0
            }
        }
        other => return Err(ClassifyError::SchemaFieldUnknown(other.to_string())),
    };
    Ok(value)
}

/// Write a labeled dataset: the commit CSV layout plus a `label` column
/// holding {a, c, p}.
pub fn export_labeled_dataset<W: Write>(
    records: &[CommitRecord],
    labels: &[Activity],
    writer: W,
) -> Result<(), ClassifyError> {
    if records.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            left: records.len(),
            right: labels.len(),
        });
    }
    if records.is_empty() {
        return Err(ClassifyError::Dataset(MiningError::EmptyDataset));
    }
    let mut keywords: Vec<String> = records
        .iter()
        .flat_map(|r| r.keyword_counts.keys().cloned())
        .collect();
    keywords.sort();
    keywords.dedup();
    let label_column: Vec<String> = labels.iter().map(|l| l.short_label().to_string()).collect();
    let mut csv_writer = csv::Writer::from_writer(writer);
    crate::mining::dataset::write_csv_records(
        &mut csv_writer,
        records,
        &keywords,
        &[("label", label_column)],
    )?;
    csv_writer.flush().map_err(MiningError::from)?;
    Ok(())
}

/// Read a labeled dataset back (see [`export_labeled_dataset`]).
pub fn import_labeled_dataset(path: &Path) -> Result<Vec<(CommitRecord, Activity)>, ClassifyError> {
    let bytes = std::fs::read(path).map_err(MiningError::from)?;
    import_labeled_dataset_from(&bytes)
}

pub fn import_labeled_dataset_from(
    bytes: &[u8],
) -> Result<Vec<(CommitRecord, Activity)>, ClassifyError> {
    let (records, extras) = crate::mining::dataset::read_csv_records(bytes)?;
    let labels = extras
        .get("label")
        .ok_or_else(|| ClassifyError::InvalidLabel("missing label column".to_string()))?;
    if labels.len() != records.len() {
        return Err(ClassifyError::LengthMismatch {
            left: records.len(),
            right: labels.len(),
        });
    }
    records
        .into_iter()
        .zip(labels)
        .map(|(record, label)| Ok((record, Activity::parse(label)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::test_support::sample_record;

    #[test]
    fn featurize_follows_schema_order() {
        let record = sample_record();
        let schema = FeatureSchema::from_sources(&["density"]);
        assert_eq!(featurize(&record, &schema).unwrap(), vec![record.density]);

        let schema = FeatureSchema::from_sources(&["lines_added_net", "kw:fix"]);
        assert_eq!(
            featurize(&record, &schema).unwrap(),
            vec![record.lines_added_net as f64, 1.0]
        );
    }

    #[test]
    fn unknown_field_is_rejected() {
        let record = sample_record();
        let schema = FeatureSchema::from_sources(&["nonsense"]);
        assert!(matches!(
            featurize(&record, &schema),
            Err(ClassifyError::SchemaFieldUnknown(_))
        ));
    }

    #[test]
    fn absent_sojourn_maps_to_zero_with_indicator() {
        let mut record = sample_record();
        record.parent_ids.clear();
        record.is_initial = true;
        record.sojourn_seconds = None;
        let schema = FeatureSchema::from_sources(&["sojourn_seconds", "sojourn_present"]);
        assert_eq!(featurize(&record, &schema).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn activity_order_and_labels() {
        assert!(Activity::Adaptive < Activity::Corrective);
        assert!(Activity::Corrective < Activity::Perfective);
        assert_eq!(Activity::parse("P").unwrap(), Activity::Perfective);
        assert_eq!(Activity::parse("corrective").unwrap(), Activity::Corrective);
        assert!(Activity::parse("x").is_err());
    }

    #[test]
    fn labeled_dataset_round_trip() {
        let records = vec![sample_record(), sample_record()];
        let labels = vec![Activity::Corrective, Activity::Perfective];
        let mut buf = Vec::new();
        export_labeled_dataset(&records, &labels, &mut buf).unwrap();
        let back = import_labeled_dataset_from(&buf).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, records[0]);
        assert_eq!(back[0].1, Activity::Corrective);
        assert_eq!(back[1].1, Activity::Perfective);
    }
}
