//! Chains of consecutive commits linked by first-parent edges.
//!
//! The youngest element of a chain is the principal commit whose
//! activity is predicted from its predecessors. Merge commits never
//! participate in chains.

use serde::{Deserialize, Serialize};

use super::{Activity, ClassifyError};
use crate::mining::CommitRecord;

/// Ordered commits, oldest to youngest, consecutive first-parent links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitChain {
    records: Vec<CommitRecord>,
}

impl CommitChain {
    /// Validate first-parent linkage and the no-merge rule.
    pub fn new(records: Vec<CommitRecord>) -> Result<Self, ClassifyError> {
        if records.is_empty() {
            return Err(ClassifyError::EmptyTrainingSet);
        }
        for record in &records {
            if record.is_merge {
                return Err(ClassifyError::MergeInChain {
                    id: record.id.clone(),
                });
            }
        }
        for window in records.windows(2) {
            let (older, younger) = (&window[0], &window[1]);
            if younger.parent_ids.first() != Some(&older.id) {
                return Err(ClassifyError::ChainLinkBroken {
                    at: younger.id.clone(),
                });
            }
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CommitRecord] {
        &self.records
    }

    /// The youngest commit: the one whose activity is predicted.
    pub fn principal(&self) -> &CommitRecord {
        self.records.last().expect("chains are non-empty")
    }

    pub fn predecessors(&self) -> &[CommitRecord] {
        &self.records[..self.records.len() - 1]
    }
}

/// A fully labeled chain used for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledChain {
    pub chain: CommitChain,
    pub labels: Vec<Activity>,
}

impl LabeledChain {
    pub fn new(chain: CommitChain, labels: Vec<Activity>) -> Result<Self, ClassifyError> {
        if chain.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch {
                left: chain.len(),
                right: labels.len(),
            });
        }
        Ok(Self { chain, labels })
    }
}

/// Segment labeled records into maximal first-parent chains.
///
/// Records are processed in the given (topological) order; a record
/// extends the chain whose current tail is its first parent, otherwise
/// it starts a new chain. Merge commits are skipped entirely.
pub fn build_chains(records: &[(CommitRecord, Activity)]) -> Vec<LabeledChain> {
    let mut open: Vec<(Vec<CommitRecord>, Vec<Activity>)> = Vec::new();
    for (record, label) in records {
        if record.is_merge {
            continue;
        }
        let parent = record.parent_ids.first();
        let position = parent.and_then(|p| {
            open.iter()
                .position(|(chain, _)| chain.last().map(|r| &r.id) == Some(p))
        });
        match position {
            Some(i) => {
                open[i].0.push(record.clone());
                open[i].1.push(*label);
            }
            None => open.push((vec![record.clone()], vec![*label])),
        }
    }
    open.into_iter()
        .filter_map(|(chain, labels)| {
            CommitChain::new(chain)
                .ok()
                .and_then(|c| LabeledChain::new(c, labels).ok())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::test_support::sample_record;

    fn linked_records(n: usize) -> Vec<CommitRecord> {
        (0..n)
            .map(|i| {
                let mut record = sample_record();
                record.id = format!("c{i}");
                record.parent_ids = if i == 0 {
                    vec![]
                } else {
                    vec![format!("c{}", i - 1)]
                };
                record.is_initial = i == 0;
                record.sojourn_seconds = if i == 0 { None } else { Some(60) };
                if i == 0 {
                    record.files_modified_gross = 0;
                    record.files_modified_net = 0;
                }
                record
            })
            .collect()
    }

    #[test]
    fn chain_validates_first_parent_links() {
        let records = linked_records(3);
        let chain = CommitChain::new(records.clone()).unwrap();
        assert_eq!(chain.principal().id, "c2");
        assert_eq!(chain.predecessors().len(), 2);

        let mut broken = records;
        broken[2].parent_ids = vec!["elsewhere".to_string()];
        assert!(matches!(
            CommitChain::new(broken),
            Err(ClassifyError::ChainLinkBroken { .. })
        ));
    }

    #[test]
    fn merges_are_rejected() {
        let mut records = linked_records(2);
        records[1].parent_ids.push("other".to_string());
        records[1].is_merge = true;
        assert!(matches!(
            CommitChain::new(records),
            Err(ClassifyError::MergeInChain { .. })
        ));
    }

    #[test]
    fn build_chains_splits_at_branch_points() {
        let mut records = linked_records(4);
        // c3 branches off c1 instead of extending c2
        records[3].parent_ids = vec!["c1".to_string()];
        let labeled: Vec<(CommitRecord, Activity)> = records
            .into_iter()
            .map(|r| (r, Activity::Perfective))
            .collect();
        let chains = build_chains(&labeled);
        assert_eq!(chains.len(), 2);
        assert_eq!(chains[0].chain.len(), 3);
        assert_eq!(chains[1].chain.len(), 1);
    }
}
