//! Repository mining: commit metadata, gross/net size counters, source
//! code density, keyword counts, and sojourn times.
//!
//! The source code density of a changeset is the ratio of net to gross
//! changed lines, where net excludes comments and blank lines. It lies in
//! [0, 1]; 1 means every changed line carries functional content.

pub(crate) mod dataset;
mod diff;
mod keywords;
mod lines;
mod repo;

pub use dataset::{export_dataset, import_dataset, ExportFormat};
pub use diff::{decode_text, diff_net_stats, diff_net_stats_bytes, DiffStats};
pub use keywords::{count_keywords, default_keywords, DEFAULT_KEYWORDS};
pub use lines::{classify_line, classify_text, LanguageProfile, LanguageSyntax, LineClass};
pub use repo::mine_repository;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("repository not found at {0}")]
    RepositoryNotFound(PathBuf),
    #[error("corrupt object {id}: {source}")]
    CorruptObject { id: String, source: git2::Error },
    #[error("binary or non-UTF-8 content")]
    UnsupportedBinaryContent,
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("cannot export an empty dataset")]
    EmptyDataset,
    #[error("git error: {0}")]
    Git(#[from] git2::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed dataset: {0}")]
    MalformedDataset(String),
}

/// One mined commit with metadata and size counters.
///
/// Net counters never exceed their gross counterparts. Merge commits
/// carry metadata and keyword counts only (size counters stay zero) and
/// are excluded from downstream classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    pub parent_ids: Vec<String>,
    /// Author timestamp, UTC seconds.
    pub author_timestamp: i64,
    pub message: String,
    pub files_added_gross: u64,
    pub files_modified_gross: u64,
    pub files_deleted_gross: u64,
    pub files_renamed_gross: u64,
    pub files_added_net: u64,
    pub files_modified_net: u64,
    pub files_deleted_net: u64,
    pub files_renamed_net: u64,
    pub lines_added_gross: u64,
    pub lines_deleted_gross: u64,
    pub lines_added_net: u64,
    pub lines_deleted_net: u64,
    pub keyword_counts: BTreeMap<String, u64>,
    /// Net over gross changed lines, in [0, 1].
    pub density: f64,
    pub is_merge: bool,
    pub is_initial: bool,
    /// Seconds since the first parent's author timestamp (clamped at 0);
    /// absent for the initial commit.
    pub sojourn_seconds: Option<u64>,
}

impl CommitRecord {
    /// Check the structural invariants of a record.
    pub fn validate(&self) -> Result<(), MiningError> {
        let violation = |msg: String| Err(MiningError::InvariantViolation(msg));
        if !(0.0..=1.0).contains(&self.density) {
            return violation(format!("density {} out of [0,1]", self.density));
        }
        let pairs = [
            (self.files_added_net, self.files_added_gross, "files_added"),
            (
                self.files_modified_net,
                self.files_modified_gross,
                "files_modified",
            ),
            (
                self.files_deleted_net,
                self.files_deleted_gross,
                "files_deleted",
            ),
            (
                self.files_renamed_net,
                self.files_renamed_gross,
                "files_renamed",
            ),
            (self.lines_added_net, self.lines_added_gross, "lines_added"),
            (
                self.lines_deleted_net,
                self.lines_deleted_gross,
                "lines_deleted",
            ),
        ];
        for (net, gross, name) in pairs {
            if net > gross {
                return violation(format!("{name}: net {net} exceeds gross {gross}"));
            }
        }
        if self.is_merge != (self.parent_ids.len() >= 2) {
            return violation("is_merge inconsistent with parent count".into());
        }
        if self.is_initial != self.parent_ids.is_empty() {
            return violation("is_initial inconsistent with parent count".into());
        }
        if self.is_initial
            && (self.files_modified_gross != 0
                || self.files_deleted_gross != 0
                || self.files_renamed_gross != 0)
        {
            return violation("initial commit may contain only additions".into());
        }
        if self.is_initial && self.sojourn_seconds.is_some() {
            return violation("initial commit has no sojourn time".into());
        }
        Ok(())
    }

    pub fn gross_lines(&self) -> u64 {
        self.lines_added_gross + self.lines_deleted_gross
    }

    pub fn net_lines(&self) -> u64 {
        self.lines_added_net + self.lines_deleted_net
    }

    /// Count of a single keyword, zero when not tracked.
    pub fn keyword_count(&self, keyword: &str) -> u64 {
        self.keyword_counts.get(keyword).copied().unwrap_or(0)
    }
}

/// Source code density: net over gross changed lines.
///
/// Zero gross size maps to density 0 by convention.
pub fn compute_density(gross_lines: u64, net_lines: u64) -> Result<f64, MiningError> {
    if net_lines > gross_lines {
        return Err(MiningError::InvariantViolation(format!(
            "net lines {net_lines} exceed gross lines {gross_lines}"
        )));
    }
    if gross_lines == 0 {
        Ok(0.0)
    } else {
        Ok(net_lines as f64 / gross_lines as f64)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub(crate) fn sample_record() -> CommitRecord {
        CommitRecord {
            id: "deadbeef".into(),
            parent_ids: vec!["cafebabe".into()],
            author_timestamp: 1_600_000_000,
            message: "fix parser".into(),
            files_added_gross: 1,
            files_modified_gross: 1,
            files_deleted_gross: 0,
            files_renamed_gross: 0,
            files_added_net: 1,
            files_modified_net: 1,
            files_deleted_net: 0,
            files_renamed_net: 0,
            lines_added_gross: 10,
            lines_deleted_gross: 2,
            lines_added_net: 8,
            lines_deleted_net: 2,
            keyword_counts: [("fix".to_string(), 1u64)].into_iter().collect(),
            density: 10.0 / 12.0,
            is_merge: false,
            is_initial: false,
            sojourn_seconds: Some(3600),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::sample_record;
    use super::*;

    #[test]
    fn density_is_the_plain_ratio() {
        assert_eq!(compute_density(10, 6).unwrap(), 0.6);
        assert_eq!(compute_density(5, 5).unwrap(), 1.0);
    }

    #[test]
    fn zero_gross_density_is_zero() {
        assert_eq!(compute_density(0, 0).unwrap(), 0.0);
    }

    #[test]
    fn net_above_gross_is_rejected() {
        assert!(matches!(
            compute_density(3, 4),
            Err(MiningError::InvariantViolation(_))
        ));
    }

    #[test]
    fn validate_catches_initial_commit_with_deletions() {
        let mut record = sample_record();
        record.parent_ids.clear();
        record.is_initial = true;
        record.sojourn_seconds = None;
        record.files_deleted_gross = 1;
        assert!(record.validate().is_err());
    }
}
