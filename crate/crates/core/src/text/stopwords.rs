//! Stopword sets: a bundled English list plus loading from plain files
//! (one word per line).

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const BUNDLED_ENGLISH: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, Default)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    /// Parse from text: one word per line, lowercased, blank lines skipped.
    pub fn from_lines(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        StopwordSet { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(StopwordSet::from_lines(&text))
    }

    /// The bundled English list.
    pub fn english() -> &'static StopwordSet {
        static SET: OnceLock<StopwordSet> = OnceLock::new();
        SET.get_or_init(|| StopwordSet::from_lines(BUNDLED_ENGLISH))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_has_common_words() {
        let set = StopwordSet::english();
        for w in ["the", "and", "it", "of", "is"] {
            assert!(set.contains(w), "missing '{w}'");
        }
        assert!(set.len() > 150);
        assert!(!set.contains("graph"));
    }

    #[test]
    fn parsing_ignores_blanks_and_case() {
        let set = StopwordSet::from_lines("The\n\n  AND \nit\n");
        assert_eq!(set.len(), 3);
        assert!(set.contains("and"));
    }
}
