//! Labeled token list files.
//!
//! Shared by stereotype lists, cue inventories and pronoun sets:
//!
//! ```text
//! # comment
//! [male]
//! करता
//! [female]
//! करती
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses a labeled list file into `label -> tokens` (file order kept per label).
pub fn parse_labeled_lists(text: &str, path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let mut lists: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(label) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let label = label.trim().to_lowercase();
            if label.is_empty() {
                return Err(Error::schema(path, idx + 1, "empty section label"));
            }
            lists.entry(label.clone()).or_default();
            current = Some(label);
            continue;
        }
        match &current {
            Some(label) => lists.get_mut(label).expect("section exists").push(line.to_string()),
            None => {
                return Err(Error::schema(
                    path,
                    idx + 1,
                    format!("token {line:?} appears before any [section] header"),
                ))
            }
        }
    }
    Ok(lists)
}

pub fn read_labeled_lists(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labeled_lists(&text, path)
}

/// Pulls the `male` and `female` sections out of a parsed list file.
pub(crate) fn male_female(
    mut lists: BTreeMap<String, Vec<String>>,
    path: &Path,
) -> Result<(Vec<String>, Vec<String>)> {
    let male = lists.remove("male");
    let female = lists.remove("female");
    match (male, female) {
        (Some(m), Some(f)) => Ok((m, f)),
        _ => Err(Error::schema(path, 0, "expected both [male] and [female] sections")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_skips_comments() {
        let text = "# cues\n[male]\nकरता\r\n\n[Female]\nकरती\nजानती\n";
        let lists = parse_labeled_lists(text, Path::new("x")).unwrap();
        assert_eq!(lists["male"], vec!["करता"]);
        assert_eq!(lists["female"], vec!["करती", "जानती"]);
    }

    #[test]
    fn token_before_header_is_rejected() {
        let err = parse_labeled_lists("करता\n[male]\n", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("before any [section]"));
    }
}
