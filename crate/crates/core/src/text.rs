//! Whitespace tokenizer with edge-punctuation stripping, and stopword lists.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use unicode_general_category::{get_general_category, GeneralCategory};

const DEFAULT_INDONESIAN: &str = include_str!("../data/stopwords_id.txt");

/// True for any character in a Unicode `P*` general category.
pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Lowercases, splits on whitespace and strips punctuation from both token
/// edges. Internal punctuation such as the hyphen in `covid-19` is kept.
/// Tokens that are pure punctuation vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|tok| tok.trim_matches(is_punctuation))
        .filter(|tok| !tok.is_empty())
        .map(ToString::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StopwordError {
    #[error("line {line}: stopword entry {entry:?} contains whitespace")]
    InternalWhitespace { line: usize, entry: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled Indonesian list.
    pub fn default_indonesian() -> Self {
        Self::parse(DEFAULT_INDONESIAN).expect("bundled stopword list is well-formed")
    }

    /// One word per line, `#` comments and blank lines ignored. Entries are lowercased.
    pub fn parse(text: &str) -> Result<Self, StopwordError> {
        let mut words = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let entry = line.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            if entry.chars().any(char::is_whitespace) {
                return Err(StopwordError::InternalWhitespace {
                    line: idx + 1,
                    entry: entry.to_string(),
                });
            }
            words.insert(entry.to_lowercase());
        }
        Ok(StopwordList { words })
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn insert(&mut self, word: &str) {
        let w = word.trim().to_lowercase();
        if !w.is_empty() {
            self.words.insert(w);
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}
