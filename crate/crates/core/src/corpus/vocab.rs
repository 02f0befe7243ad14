use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Surface of the reserved padding token at position 0.
pub const NULL_TOKEN: &str = "<NULL>";
/// Position of the padding token.
pub const NULL_INDEX: usize = 0;

/// Token inventory ordered by descending count, then ascending surface,
/// with the padding token pinned at position 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Counts tokens over `docs` and keeps those seen at least `min_count` times.
    ///
    /// A literal `<NULL>` token in the input is discarded, since that surface
    /// is reserved for padding.
    pub fn build<S: AsRef<str>>(docs: &[Vec<S>], min_count: u64) -> Result<Self> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in docs {
            for tok in doc {
                *counts.entry(tok.as_ref()).or_default() += 1;
            }
        }
        let mut kept: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(s, c)| c >= min_count.max(1) && s != NULL_TOKEN)
            .map(|(s, c)| (s.to_owned(), c))
            .collect();
        if kept.is_empty() {
            return Err(Error::AllTokensPruned { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut entries = Vec::with_capacity(kept.len() + 1);
        entries.push((NULL_TOKEN.to_owned(), 0));
        entries.extend(kept);
        Ok(Self::from_entries_unchecked(entries))
    }

    /// Rebuilds a vocabulary from its entries in position order (NULL first).
    pub fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        match entries.first() {
            Some((s, 0)) if s == NULL_TOKEN => {}
            _ => {
                return Err(Error::InvalidInput(
                    "vocabulary must start with the NULL entry".into(),
                ))
            }
        }
        if entries.len() < 2 {
            return Err(Error::InvalidInput("vocabulary has no words".into()));
        }
        for pair in entries[1..].windows(2) {
            let ((sa, ca), (sb, cb)) = (&pair[0], &pair[1]);
            if ca < cb || (ca == cb && sa >= sb) {
                return Err(Error::InvalidInput(format!(
                    "vocabulary entries out of order at `{sb}`"
                )));
            }
        }
        for (s, _) in &entries[1..] {
            if s.is_empty() || s.chars().any(char::is_whitespace) || s == NULL_TOKEN {
                return Err(Error::InvalidInput(format!("invalid surface `{s}`")));
            }
        }
        Ok(Self::from_entries_unchecked(entries))
    }

    fn from_entries_unchecked(entries: Vec<(String, u64)>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, (s, _))| (s.clone(), i))
            .collect();
        Vocabulary { entries, index }
    }

    /// Number of positions, including NULL.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of real (non-NULL) words.
    pub fn n_words(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, position: usize) -> &str {
        &self.entries[position].0
    }

    pub fn count(&self, position: usize) -> u64 {
        self.entries[position].1
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    /// Counts of the real words, in position order.
    pub fn word_counts(&self) -> Vec<u64> {
        self.entries[1..].iter().map(|e| e.1).collect()
    }

    /// Writes `surface<TAB>count` per line, in position order.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, c) in &self.entries {
            writeln!(out, "{s}\t{c}")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(input: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let (s, c) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidInput(format!("vocabulary line {} lacks a tab", lineno + 1))
            })?;
            let c = c.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("vocabulary line {}: bad count", lineno + 1))
            })?;
            entries.push((s.to_owned(), c));
        }
        Self::from_entries(entries)
    }
}
