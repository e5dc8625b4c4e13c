//! Gross/net line statistics from an LCS line diff.
//!
//! Gross counts are the raw changed-line counts; net counts exclude
//! changed lines that are comments or blank. Modified lines appear as one
//! deletion plus one addition, matching `git diff --numstat` semantics.

use similar::{ChangeTag, TextDiff};

use super::lines::{classify_text, LanguageProfile, LineClass};
use super::MiningError;

/// Changed-line counts of one file-level diff.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiffStats {
    pub added_gross: u64,
    pub deleted_gross: u64,
    pub added_net: u64,
    pub deleted_net: u64,
}

impl DiffStats {
    pub fn accumulate(&mut self, other: DiffStats) {
        self.added_gross += other.added_gross;
        self.deleted_gross += other.deleted_gross;
        self.added_net += other.added_net;
        self.deleted_net += other.deleted_net;
    }

    /// True when no changed line survived comment/blank stripping.
    pub fn net_empty(&self) -> bool {
        self.added_net == 0 && self.deleted_net == 0
    }
}

/// Decode file bytes as UTF-8 text, rejecting binary content.
///
/// A NUL byte or invalid UTF-8 marks the content as binary; such files
/// contribute file counts but no line counts.
pub fn decode_text(bytes: &[u8]) -> Result<&str, MiningError> {
    if bytes.contains(&0) {
        return Err(MiningError::UnsupportedBinaryContent);
    }
    std::str::from_utf8(bytes).map_err(|_| MiningError::UnsupportedBinaryContent)
}

/// Line statistics between two file versions (absent side = add/delete).
///
/// Gross counts come from an LCS line diff; net counts keep only changed
/// lines classified as code under `profile`/`ext`, with block-comment
/// state threaded through each file from its first line.
pub fn diff_net_stats(
    old_text: Option<&str>,
    new_text: Option<&str>,
    profile: &LanguageProfile,
    ext: &str,
) -> Result<DiffStats, MiningError> {
    assert!(
        old_text.is_some() || new_text.is_some(),
        "diff of two absent files"
    );
    let old = old_text.unwrap_or("");
    let new = new_text.unwrap_or("");
    let syntax = profile.syntax_for(ext);
    let old_classes = classify_text(old, syntax);
    let new_classes = classify_text(new, syntax);

    let diff = TextDiff::from_lines(old, new);
    let mut stats = DiffStats::default();
    for change in diff.iter_all_changes() {
        match change.tag() {
            ChangeTag::Equal => {}
            ChangeTag::Delete => {
                stats.deleted_gross += 1;
                let idx = change.old_index().expect("delete has old index");
                if old_classes.get(idx) == Some(&LineClass::Code) {
                    stats.deleted_net += 1;
                }
            }
            ChangeTag::Insert => {
                stats.added_gross += 1;
                let idx = change.new_index().expect("insert has new index");
                if new_classes.get(idx) == Some(&LineClass::Code) {
                    stats.added_net += 1;
                }
            }
        }
    }
    Ok(stats)
}

/// Same as [`diff_net_stats`] but starting from raw bytes; binary content
/// is reported as [`MiningError::UnsupportedBinaryContent`].
pub fn diff_net_stats_bytes(
    old_bytes: Option<&[u8]>,
    new_bytes: Option<&[u8]>,
    profile: &LanguageProfile,
    ext: &str,
) -> Result<DiffStats, MiningError> {
    let old = old_bytes.map(decode_text).transpose()?;
    let new = new_bytes.map(decode_text).transpose()?;
    diff_net_stats(old, new, profile, ext)
}
