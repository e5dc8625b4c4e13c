//! Per-line source classification into code, comment, and blank lines.
//!
//! Gross line counts include everything; net counts keep only lines
//! classified [`LineClass::Code`]. Comment syntax is looked up per file
//! extension in a [`LanguageProfile`]; unknown extensions fall back to a
//! permissive default (`#` and `//` line comments).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Exhaustive, mutually exclusive classification of a single line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineClass {
    Code,
    Comment,
    Blank,
}

/// Comment syntax for one language (keyed by extension).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSyntax {
    /// Markers that comment out the rest of the line, e.g. `//` or `#`.
    pub line_comment_markers: Vec<String>,
    /// Open/close pairs for block comments, e.g. `/*` and `*/`.
    pub block_comment_pairs: Vec<(String, String)>,
}

impl LanguageSyntax {
    pub fn new(line: &[&str], blocks: &[(&str, &str)]) -> Self {
        Self {
            line_comment_markers: line.iter().map(|s| s.to_string()).collect(),
            block_comment_pairs: blocks
                .iter()
                .map(|(o, c)| (o.to_string(), c.to_string()))
                .collect(),
        }
    }
}

/// Extension-keyed comment syntax table with a fallback entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub by_extension: BTreeMap<String, LanguageSyntax>,
    pub fallback: LanguageSyntax,
}

impl LanguageProfile {
    /// Syntax for `ext` (lowercased, without the dot), or the fallback.
    pub fn syntax_for(&self, ext: &str) -> &LanguageSyntax {
        self.by_extension
            .get(&ext.to_ascii_lowercase())
            .unwrap_or(&self.fallback)
    }
}

impl Default for LanguageProfile {
    fn default() -> Self {
        let c_like = LanguageSyntax::new(&["//"], &[("/*", "*/")]);
        let hash = LanguageSyntax::new(&["#"], &[]);
        let xml_like = LanguageSyntax::new(&[], &[("<!--", "-->")]);
        let sql_like = LanguageSyntax::new(&["--"], &[("/*", "*/")]);

        let mut by_extension = BTreeMap::new();
        for ext in [
            "c", "h", "cc", "hh", "cpp", "hpp", "cxx", "hxx", "cs", "java", "js", "jsx", "ts",
            "tsx", "go", "rs", "kt", "kts", "swift", "scala", "dart", "groovy",
        ] {
            by_extension.insert(ext.to_string(), c_like.clone());
        }
        by_extension.insert(
            "php".to_string(),
            LanguageSyntax::new(&["//", "#"], &[("/*", "*/")]),
        );
        by_extension.insert("css".to_string(), LanguageSyntax::new(&[], &[("/*", "*/")]));
        for ext in [
            "py", "rb", "sh", "bash", "zsh", "pl", "pm", "r", "yaml", "yml", "toml", "mk",
            "cmake", "tcl", "awk",
        ] {
            by_extension.insert(ext.to_string(), hash.clone());
        }
        for ext in ["html", "htm", "xml", "xhtml", "svg", "md"] {
            by_extension.insert(ext.to_string(), xml_like.clone());
        }
        by_extension.insert("sql".to_string(), sql_like.clone());
        by_extension.insert(
            "lua".to_string(),
            LanguageSyntax::new(&["--"], &[("--[[", "]]")]),
        );
        by_extension.insert(
            "hs".to_string(),
            LanguageSyntax::new(&["--"], &[("{-", "-}")]),
        );

        Self {
            by_extension,
            fallback: LanguageSyntax::new(&["#", "//"], &[]),
        }
    }
}

/// Classify one line and thread the block-comment state.
///
/// Blank wins when the line is whitespace-only; a line is a comment only
/// when every non-whitespace character sits inside comment syntax; any
/// functional content makes the whole line code.
pub fn classify_line(
    line: &str,
    profile: &LanguageProfile,
    ext: &str,
    in_block: bool,
) -> (LineClass, bool) {
    let syntax = profile.syntax_for(ext);
    classify_with_syntax(line, syntax, in_block)
}

pub(crate) fn classify_with_syntax(
    line: &str,
    syntax: &LanguageSyntax,
    in_block: bool,
) -> (LineClass, bool) {
    if line.trim().is_empty() {
        return (LineClass::Blank, in_block);
    }

    let bytes = line.as_bytes();
    let mut pos = 0usize;
    let mut block = if in_block {
        // Which pair opened the block is unknown across diff boundaries;
        // accept any configured close marker.
        Some(usize::MAX)
    } else {
        None
    };
    let mut has_code = false;

    'scan: while pos < bytes.len() {
        if let Some(open_idx) = block {
            // Inside a block comment: look for the nearest close marker.
            let candidates: Vec<&str> = if open_idx == usize::MAX {
                syntax.block_comment_pairs.iter().map(|(_, c)| c.as_str()).collect()
            } else {
                vec![syntax.block_comment_pairs[open_idx].1.as_str()]
            };
            let rest = &line[pos..];
            let mut best: Option<(usize, usize)> = None;
            for close in candidates {
                if let Some(at) = rest.find(close) {
                    if best.map_or(true, |(b, _)| at < b) {
                        best = Some((at, close.len()));
                    }
                }
            }
            match best {
                Some((at, len)) => {
                    pos += at + len;
                    block = None;
                }
                None => break 'scan, // block continues past end of line
            }
        } else {
            let rest = &line[pos..];
            if let Some(marker) = syntax
                .line_comment_markers
                .iter()
                .find(|m| rest.starts_with(m.as_str()))
            {
                let _ = marker;
                break 'scan; // rest of line is comment
            }
            if let Some(idx) = syntax
                .block_comment_pairs
                .iter()
                .position(|(open, _)| rest.starts_with(open.as_str()))
            {
                pos += syntax.block_comment_pairs[idx].0.len();
                block = Some(idx);
                continue;
            }
            let ch = rest.chars().next().unwrap();
            if !ch.is_whitespace() {
                has_code = true;
            }
            pos += ch.len_utf8();
        }
    }

    let class = if has_code {
        LineClass::Code
    } else {
        LineClass::Comment
    };
    (class, block.is_some())
}

/// Classify every line of a file, threading block state from the top.
pub fn classify_text(text: &str, syntax: &LanguageSyntax) -> Vec<LineClass> {
    let mut in_block = false;
    text.lines()
        .map(|line| {
            let (class, next) = classify_with_syntax(line, syntax, in_block);
            in_block = next;
            class
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_profile() -> LanguageProfile {
        LanguageProfile::default()
    }

    #[test]
    fn pure_line_comment_is_comment() {
        let (class, block) = classify_line("// todo", &c_profile(), "c", false);
        assert_eq!(class, LineClass::Comment);
        assert!(!block);
    }

    #[test]
    fn whitespace_only_is_blank() {
        let (class, block) = classify_line("   ", &c_profile(), "c", false);
        assert_eq!(class, LineClass::Blank);
        assert!(!block);
    }

    #[test]
    fn mixed_code_and_comment_is_code() {
        let (class, block) = classify_line("x = 1; // c", &c_profile(), "c", false);
        assert_eq!(class, LineClass::Code);
        assert!(!block);
    }

    #[test]
    fn block_comment_state_threads() {
        let p = c_profile();
        let (class, block) = classify_line("/* start", &p, "c", false);
        assert_eq!((class, block), (LineClass::Comment, true));
        let (class, block) = classify_line("middle of block", &p, "c", true);
        assert_eq!((class, block), (LineClass::Comment, true));
        let (class, block) = classify_line("end */ x = 2;", &p, "c", true);
        assert_eq!((class, block), (LineClass::Code, false));
    }

    #[test]
    fn one_line_block_comment_with_code_after() {
        let (class, block) = classify_line("/* c */ foo();", &c_profile(), "c", false);
        assert_eq!((class, block), (LineClass::Code, false));
        let (class, block) = classify_line("/* c */  ", &c_profile(), "c", false);
        assert_eq!((class, block), (LineClass::Comment, false));
    }

    #[test]
    fn blank_inside_block_stays_blank_and_in_block() {
        let (class, block) = classify_line("  ", &c_profile(), "c", true);
        assert_eq!((class, block), (LineClass::Blank, true));
    }

    #[test]
    fn unknown_extension_uses_fallback() {
        let (class, _) = classify_line("# note", &c_profile(), "weird", false);
        assert_eq!(class, LineClass::Comment);
        let (class, _) = classify_line("// note", &c_profile(), "weird", false);
        assert_eq!(class, LineClass::Comment);
        let (class, _) = classify_line("value = 3", &c_profile(), "weird", false);
        assert_eq!(class, LineClass::Code);
    }

    #[test]
    fn hash_language_ignores_c_blocks() {
        let (class, block) = classify_line("/* not a block here */", &c_profile(), "py", false);
        assert_eq!((class, block), (LineClass::Code, false));
    }

    #[test]
    fn classify_text_threads_whole_file() {
        let syntax = LanguageSyntax::new(&["//"], &[("/*", "*/")]);
        let classes = classify_text("a\n/*\nb\n*/\nc // d\n\n", &syntax);
        assert_eq!(
            classes,
            vec![
                LineClass::Code,
                LineClass::Comment,
                LineClass::Comment,
                LineClass::Comment,
                LineClass::Code,
                LineClass::Blank,
            ]
        );
    }
}
