//! Shared word lists: synonym groups, filler vocabulary, and sentence
//! templates.
//!
//! The synonym table drives two things at once: the deterministic test
//! embedder maps all members of a group onto one canonical vector, and the
//! perturbation generator swaps words within a group. That way synthetic
//! synonym substitutions read as "semantically similar" to the metrics.
//!
//! File formats: synonym table is one group per line, comma-separated;
//! filler vocabulary is one word per line; templates are one per line with
//! `{s}` marking where the original sentence goes (a line consisting of
//! `{reorder}` means "reorder the sentence's clause halves" instead).

use std::collections::HashMap;
use std::sync::OnceLock;

const DEFAULT_SYNONYMS: &str = include_str!("synonyms.txt");
const DEFAULT_FILLERS: &str = include_str!("fillers.txt");
const DEFAULT_TEMPLATES: &str = include_str!("templates.txt");

/// Groups of interchangeable words with a canonical representative per group.
#[derive(Debug, Clone, Default)]
pub struct SynonymTable {
    groups: Vec<Vec<String>>,
    group_index: HashMap<String, usize>,
}

impl SynonymTable {
    /// Parses the one-group-per-line, comma-separated format. Blank lines
    /// and `#` comments are skipped; words are lowercased.
    pub fn parse(text: &str) -> Self {
        let mut table = SynonymTable::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let members: Vec<String> = line
                .split(',')
                .map(|w| w.trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect();
            if members.len() < 2 {
                continue;
            }
            let idx = table.groups.len();
            for m in &members {
                table.group_index.entry(m.clone()).or_insert(idx);
            }
            table.groups.push(members);
        }
        table
    }

    /// An empty table (every word is its own canonical form).
    pub fn empty() -> Self {
        SynonymTable::default()
    }

    /// The table shipped with the crate (~20 groups).
    pub fn builtin() -> &'static SynonymTable {
        static TABLE: OnceLock<SynonymTable> = OnceLock::new();
        TABLE.get_or_init(|| SynonymTable::parse(DEFAULT_SYNONYMS))
    }

    /// Canonical representative for `word`: the first member of its group,
    /// or `word` itself when it belongs to no group.
    pub fn canonical<'a>(&'a self, word: &'a str) -> &'a str {
        match self.group_index.get(word) {
            Some(&idx) => self.groups[idx][0].as_str(),
            None => word,
        }
    }

    /// All members of the group containing `word`, if any.
    pub fn group_of(&self, word: &str) -> Option<&[String]> {
        self.group_index
            .get(word)
            .map(|&idx| self.groups[idx].as_slice())
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Filler vocabulary the perturbation generator substitutes in when a word
/// has no synonym group. Disjoint from the synonym table by construction.
pub fn builtin_fillers() -> &'static [String] {
    static FILLERS: OnceLock<Vec<String>> = OnceLock::new();
    FILLERS.get_or_init(|| parse_word_list(DEFAULT_FILLERS))
}

/// Sentence templates used by the rewrite profile. `{s}` is replaced by the
/// original sentence; the `{reorder}` entry reorders clause halves instead.
pub fn builtin_templates() -> &'static [String] {
    static TEMPLATES: OnceLock<Vec<String>> = OnceLock::new();
    TEMPLATES.get_or_init(|| {
        DEFAULT_TEMPLATES
            .lines()
            .map(|l| l.trim_end().to_string())
            .filter(|l| !l.is_empty())
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_has_about_twenty_groups() {
        let table = SynonymTable::builtin();
        assert!(table.group_count() >= 18);
    }

    #[test]
    fn canonical_maps_group_members_to_first_entry() {
        let table = SynonymTable::parse("big,large,huge\nsmall,little");
        assert_eq!(table.canonical("large"), "big");
        assert_eq!(table.canonical("big"), "big");
        assert_eq!(table.canonical("little"), "small");
        assert_eq!(table.canonical("zebra"), "zebra");
    }

    #[test]
    fn group_of_returns_members() {
        let table = SynonymTable::parse("big,large,huge");
        assert_eq!(table.group_of("huge").unwrap().len(), 3);
        assert!(table.group_of("zebra").is_none());
    }

    #[test]
    fn fillers_are_disjoint_from_synonyms() {
        let table = SynonymTable::builtin();
        for filler in builtin_fillers() {
            assert!(table.group_of(filler).is_none(), "{filler} is in a synonym group");
        }
    }

    #[test]
    fn templates_include_substitution_marker() {
        let templates = builtin_templates();
        assert!(templates.iter().any(|t| t.contains("{s}")));
        assert!(templates.iter().any(|t| t == "{reorder}"));
    }
}
