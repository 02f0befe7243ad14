//! Text ingestion: tokenization, vocabulary, Huffman coding and the encoded
//! corpus of token-index documents.

mod huffman;
mod tokenize;
mod vocab;

use std::io::BufRead;

pub use huffman::HuffmanCoding;
pub use tokenize::{tokenize, Tokenizer, DEFAULT_PUNCTUATION};
pub use vocab::{Vocabulary, NULL_INDEX, NULL_TOKEN};

use crate::error::{Error, Result};

/// Documents as vocabulary positions. Document `i` has paragraph id `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Vec<usize>>,
    labels: Option<Vec<usize>>,
}

impl Corpus {
    /// Encodes tokenized documents, dropping out-of-vocabulary tokens.
    ///
    /// Documents left empty stay in place so that ids remain positional.
    pub fn encode<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary) -> Self {
        let documents = docs
            .iter()
            .map(|doc| encode_tokens(doc, vocab))
            .collect();
        Corpus {
            documents,
            labels: None,
        }
    }

    /// Builds a corpus from already encoded documents.
    pub fn from_indices(documents: Vec<Vec<usize>>, vocab: &Vocabulary) -> Result<Self> {
        for doc in &documents {
            if let Some(&bad) = doc.iter().find(|&&t| t == NULL_INDEX || t >= vocab.len()) {
                return Err(Error::InvalidInput(format!(
                    "token index {bad} is not a word of the vocabulary"
                )));
            }
        }
        Ok(Corpus {
            documents,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.documents.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} documents",
                labels.len(),
                self.documents.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, id: usize) -> &[usize] {
        &self.documents[id]
    }

    pub fn documents(&self) -> &[Vec<usize>] {
        &self.documents
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    /// Maps a document back to its surfaces.
    pub fn decode<'v>(&self, id: usize, vocab: &'v Vocabulary) -> Vec<&'v str> {
        self.documents[id].iter().map(|&t| vocab.surface(t)).collect()
    }
}

/// Vocabulary positions of the in-vocabulary tokens, in order.
pub fn encode_tokens<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<usize> {
    tokens.iter().filter_map(|t| vocab.get(t.as_ref())).collect()
}

/// Reads one document per line.
pub fn read_documents<R: BufRead>(input: R, tokenizer: &Tokenizer) -> Result<Vec<Vec<String>>> {
    input
        .lines()
        .map(|line| Ok(tokenizer.tokenize(&line?)))
        .collect()
}

/// Reads one non-negative integer label per line.
pub fn read_labels<R: BufRead>(input: R) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let label = line
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("label line {}: `{line}`", i + 1)))?;
        labels.push(label);
    }
    Ok(labels)
}
