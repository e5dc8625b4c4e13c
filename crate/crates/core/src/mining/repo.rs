//! Git repository walking and per-commit size extraction.

use std::collections::BTreeMap;
use std::path::Path;

use git2::{Delta, Diff, DiffFindOptions, DiffOptions, Oid, Repository, Sort, Tree};

use super::diff::{diff_net_stats_bytes, DiffStats};
use super::keywords::count_keywords;
use super::lines::LanguageProfile;
use super::{compute_density, CommitRecord, MiningError};

/// Mine every commit reachable from HEAD, oldest first (topological).
///
/// Non-merge commits get full gross/net counters from a line diff against
/// their (first) parent; merge commits are flagged and carry metadata
/// only. Binary files contribute file counts but zero line counts.
pub fn mine_repository(
    repo_path: &Path,
    profile: &LanguageProfile,
    keywords: &[String],
) -> Result<Vec<CommitRecord>, MiningError> {
    let repo = Repository::open(repo_path)
        .map_err(|_| MiningError::RepositoryNotFound(repo_path.to_path_buf()))?;
    let mut walk = repo.revwalk()?;
    walk.push_head()?;
    walk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;

    let mut timestamps: BTreeMap<String, i64> = BTreeMap::new();
    let mut records = Vec::new();
    for oid in walk {
        let oid = oid?;
        let commit = repo.find_commit(oid).map_err(|e| MiningError::CorruptObject {
            id: oid.to_string(),
            source: e,
        })?;
        let id = oid.to_string();
        let parent_ids: Vec<String> = commit.parent_ids().map(|p| p.to_string()).collect();
        let author_timestamp = commit.author().when().seconds();
        let message = commit.message().unwrap_or("").to_string();
        let is_merge = parent_ids.len() >= 2;
        let is_initial = parent_ids.is_empty();

        let sojourn_seconds = parent_ids.first().map(|parent| {
            let parent_ts = timestamps.get(parent).copied().unwrap_or(author_timestamp);
            (author_timestamp - parent_ts).max(0) as u64
        });
        timestamps.insert(id.clone(), author_timestamp);

        let mut record = CommitRecord {
            id: id.clone(),
            parent_ids,
            author_timestamp,
            message: message.clone(),
            files_added_gross: 0,
            files_modified_gross: 0,
            files_deleted_gross: 0,
            files_renamed_gross: 0,
            files_added_net: 0,
            files_modified_net: 0,
            files_deleted_net: 0,
            files_renamed_net: 0,
            lines_added_gross: 0,
            lines_deleted_gross: 0,
            lines_added_net: 0,
            lines_deleted_net: 0,
            keyword_counts: count_keywords(&message, keywords),
            density: 0.0,
            is_merge,
            is_initial,
            sojourn_seconds,
        };

        if !is_merge {
            let diff = commit_diff(&repo, &commit)?;
            accumulate_deltas(&repo, &diff, profile, &mut record)?;
            record.density = compute_density(record.gross_lines(), record.net_lines())?;
        }
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

fn commit_diff<'r>(
    repo: &'r Repository,
    commit: &git2::Commit<'r>,
) -> Result<Diff<'r>, MiningError> {
    let tree = commit_tree(commit)?;
    let parent_tree = match commit.parent(0) {
        Ok(parent) => Some(commit_tree(&parent)?),
        Err(_) => None,
    };
    let mut opts = DiffOptions::new();
    let mut diff = repo.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))?;
    // rename detection: only what the repository content itself supports
    let mut find = DiffFindOptions::new();
    find.renames(true);
    diff.find_similar(Some(&mut find))?;
    Ok(diff)
}

fn commit_tree<'r>(commit: &git2::Commit<'r>) -> Result<Tree<'r>, MiningError> {
    commit.tree().map_err(|e| MiningError::CorruptObject {
        id: commit.id().to_string(),
        source: e,
    })
}

fn accumulate_deltas(
    repo: &Repository,
    diff: &Diff,
    profile: &LanguageProfile,
    record: &mut CommitRecord,
) -> Result<(), MiningError> {
    for delta in diff.deltas() {
        let status = delta.status();
        let (gross_file, net_file): (&mut u64, &mut u64) = match status {
            Delta::Added | Delta::Copied => {
                (&mut record.files_added_gross, &mut record.files_added_net)
            }
            Delta::Deleted => (
                &mut record.files_deleted_gross,
                &mut record.files_deleted_net,
            ),
            Delta::Modified | Delta::Typechange => (
                &mut record.files_modified_gross,
                &mut record.files_modified_net,
            ),
            Delta::Renamed => (
                &mut record.files_renamed_gross,
                &mut record.files_renamed_net,
            ),
            _ => continue,
        };
        *gross_file += 1;

        let old_bytes = blob_bytes(repo, delta.old_file().id())?;
        let new_bytes = blob_bytes(repo, delta.new_file().id())?;
        if old_bytes.is_none() && new_bytes.is_none() {
            continue;
        }
        let ext = delta
            .new_file()
            .path()
            .or_else(|| delta.old_file().path())
            .and_then(|p| p.extension())
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_string();

        let stats = match diff_net_stats_bytes(
            old_bytes.as_deref(),
            new_bytes.as_deref(),
            profile,
            &ext,
        ) {
            Ok(stats) => stats,
            // binary file: flagged by file counts only
            Err(MiningError::UnsupportedBinaryContent) => DiffStats::default(),
            Err(e) => return Err(e),
        };
        if !stats.net_empty() {
            *net_file += 1;
        }
        record.lines_added_gross += stats.added_gross;
        record.lines_deleted_gross += stats.deleted_gross;
        record.lines_added_net += stats.added_net;
        record.lines_deleted_net += stats.deleted_net;
    }
    Ok(())
}

fn blob_bytes(repo: &Repository, oid: Oid) -> Result<Option<Vec<u8>>, MiningError> {
    if oid.is_zero() {
        return Ok(None);
    }
    let blob = repo.find_blob(oid).map_err(|e| MiningError::CorruptObject {
        id: oid.to_string(),
        source: e,
    })?;
    Ok(Some(blob.content().to_vec()))
}
