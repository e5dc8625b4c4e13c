//! Baseline classifiers: majority class (zero-rule) and a fixed-priority
//! keyword rule.

use serde::{Deserialize, Serialize};

use super::{Activity, ClassifyError};
use crate::mining::{count_keywords, CommitRecord};

/// Least-skill baseline: always predicts the modal training class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroRule {
    majority: Activity,
}

/// Fit the zero-rule on training labels; ties break by the fixed class
/// order adaptive < corrective < perfective.
pub fn zero_rule_fit(labels: &[Activity]) -> Result<ZeroRule, ClassifyError> {
    if labels.is_empty() {
        return Err(ClassifyError::EmptyTrainingSet);
    }
    let mut counts = [0usize; 3];
    for label in labels {
        counts[label.index()] += 1;
    }
    let mut majority = Activity::Adaptive;
    let mut best = 0usize;
    for activity in Activity::ALL {
        let count = counts[activity.index()];
        if count > best {
            best = count;
            majority = activity;
        }
    }
    Ok(ZeroRule { majority })
}

impl ZeroRule {
    pub fn predict(&self) -> Activity {
        self.majority
    }
}

/// Keyword tables and the optional net-empty exclusion for the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRuleConfig {
    /// Exclude adaptive for commits without net-added lines (net-empty
    /// commits are never adaptive: adding a feature needs net code).
    pub exclude_adaptive_when_net_empty: bool,
}

impl Default for KeywordRuleConfig {
    fn default() -> Self {
        Self {
            exclude_adaptive_when_net_empty: false,
        }
    }
}

const CORRECTIVE_KEYWORDS: [&str; 4] = ["fix", "bug", "error", "fail"];
const ADAPTIVE_KEYWORDS: [&str; 4] = ["implement", "add", "feature", "new"];
const PERFECTIVE_KEYWORDS: [&str; 6] = ["refactor", "clean", "style", "format", "rename", "doc"];

fn any_match(message: &str, keywords: &[&str]) -> bool {
    let owned: Vec<String> = keywords.iter().map(|s| s.to_string()).collect();
    count_keywords(message, &owned).values().any(|&c| c > 0)
}

/// Classify a commit by its message keywords, first matching rule wins:
/// corrective, then adaptive, then perfective; no match falls through to
/// perfective (the modal class).
pub fn keyword_rule(record: &CommitRecord, config: &KeywordRuleConfig) -> Activity {
    if any_match(&record.message, &CORRECTIVE_KEYWORDS) {
        return Activity::Corrective;
    }
    let adaptive_allowed =
        !(config.exclude_adaptive_when_net_empty && record.lines_added_net == 0);
    if adaptive_allowed && any_match(&record.message, &ADAPTIVE_KEYWORDS) {
        return Activity::Adaptive;
    }
    if any_match(&record.message, &PERFECTIVE_KEYWORDS) {
        return Activity::Perfective;
    }
    Activity::Perfective
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::test_support::sample_record;

    #[test]
    fn zero_rule_predicts_majority() {
        let labels = [
            Activity::Perfective,
            Activity::Perfective,
            Activity::Corrective,
        ];
        let model = zero_rule_fit(&labels).unwrap();
        assert_eq!(model.predict(), Activity::Perfective);
    }

    #[test]
    fn zero_rule_ties_break_by_class_order() {
        let labels = [Activity::Adaptive, Activity::Corrective];
        let model = zero_rule_fit(&labels).unwrap();
        assert_eq!(model.predict(), Activity::Adaptive);
    }

    #[test]
    fn zero_rule_rejects_empty_training() {
        assert!(matches!(
            zero_rule_fit(&[]),
            Err(ClassifyError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn corrective_keywords_win_first() {
        let mut record = sample_record();
        record.message = "fix NPE in parser".into();
        assert_eq!(
            keyword_rule(&record, &KeywordRuleConfig::default()),
            Activity::Corrective
        );
    }

    #[test]
    fn net_empty_commits_are_never_adaptive() {
        let mut record = sample_record();
        record.message = "implement login".into();
        record.lines_added_net = 0;
        let config = KeywordRuleConfig {
            exclude_adaptive_when_net_empty: true,
        };
        assert_eq!(keyword_rule(&record, &config), Activity::Perfective);
        // with the rule off the adaptive keywords match normally
        assert_eq!(
            keyword_rule(&record, &KeywordRuleConfig::default()),
            Activity::Adaptive
        );
    }

    #[test]
    fn unmatched_messages_fall_through_to_perfective() {
        let mut record = sample_record();
        record.message = "weekly housekeeping".into();
        assert_eq!(
            keyword_rule(&record, &KeywordRuleConfig::default()),
            Activity::Perfective
        );
    }
}
