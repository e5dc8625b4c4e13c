//! Whole-word keyword counting over commit messages.

use std::collections::BTreeMap;

/// Default keyword list (20 entries); configurable everywhere it is used.
pub const DEFAULT_KEYWORDS: [&str; 20] = [
    "fix", "bug", "feature", "implement", "add", "refactor", "clean", "test", "doc", "merge",
    "update", "remove", "improve", "error", "fail", "change", "release", "style", "format",
    "rename",
];

/// Case-insensitive whole-word keyword counts.
///
/// The message is split into tokens at every non-alphanumeric character;
/// a keyword matches only a whole token ("prefix" does not match "fix").
pub fn count_keywords(message: &str, keywords: &[String]) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> = keywords.iter().map(|k| (k.clone(), 0)).collect();
    for token in message
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let token = token.to_lowercase();
        if let Some(count) = counts.get_mut(&token) {
            *count += 1;
        }
    }
    counts
}

pub fn default_keywords() -> Vec<String> {
    DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kw(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn count_is_case_insensitive() {
        let counts = count_keywords("Fix typo; fix build", &kw(&["fix"]));
        assert_eq!(counts["fix"], 2);
    }

    #[test]
    fn empty_message_counts_zero() {
        let counts = count_keywords("", &kw(&["fix"]));
        assert_eq!(counts["fix"], 0);
    }

    #[test]
    fn prefix_does_not_match_whole_word() {
        let counts = count_keywords("prefix bug", &kw(&["fix"]));
        assert_eq!(counts["fix"], 0);
    }

    #[test]
    fn splits_at_non_alphanumerics() {
        let counts = count_keywords("fix/fix,fix.fixes", &kw(&["fix"]));
        assert_eq!(counts["fix"], 3);
    }

    #[test]
    fn default_list_has_twenty_entries() {
        assert_eq!(DEFAULT_KEYWORDS.len(), 20);
    }
}
