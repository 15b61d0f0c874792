use std::collections::HashSet;
use std::path::Path;

use rand::Rng;

use super::DatasetError;
use crate::imageio::sha256_hex;

/// Ordered, de-duplicated word list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    words: Vec<String>,
    index: HashSet<String>,
    source_digest: String,
}

impl Lexicon {
    /// One word per line, surrounding whitespace trimmed. Blank lines are
    /// skipped and repeats keep their first position.
    pub fn from_text(text: &str) -> Result<Self, DatasetError> {
        let mut words = Vec::new();
        let mut index = HashSet::new();
        for w in text.lines().map(|l| l.trim_start_matches('\u{feff}').trim()) {
            if !w.is_empty() && index.insert(w.to_string()) {
                words.push(w.to_string());
            }
        }
        if words.is_empty() {
            return Err(DatasetError::Lexicon("lexicon has no words".into()));
        }
        let source_digest = sha256_hex(words.join("\n").as_bytes());
        Ok(Self {
            words,
            index,
            source_digest,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &str) -> bool {
        self.index.contains(w)
    }

    /// Hash of the normalized word list.
    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    /// Uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        &self.words[rng.random_range(0..self.words.len())]
    }

    /// Words kept by `keep`, preserving order.
    pub fn filtered(&self, keep: impl Fn(&str) -> bool) -> Result<Self, DatasetError> {
        let kept: Vec<&str> = self.words.iter().map(String::as_str).filter(|w| keep(w)).collect();
        Self::from_text(&kept.join("\n"))
    }

    pub fn to_text(&self) -> String {
        let mut s = self.words.join("\n");
        s.push('\n');
        s
    }
}
