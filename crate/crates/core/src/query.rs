//! Cosine nearest-neighbour and analogy queries over trained vectors.

use std::cmp::Ordering;

use crate::corpus::NULL_INDEX;
use crate::error::{Error, Result};
use crate::model::PvModel;
use crate::scalar::{dot, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Words,
    Paragraphs,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Query<'a> {
    /// A vocabulary word; excluded from its own results in word space.
    Word(&'a str),
    /// A training paragraph; excluded from its own results in paragraph space.
    Paragraph(usize),
    /// A raw vector such as an inferred paragraph vector. Nothing is excluded.
    Vector(&'a [f64]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    /// Vocabulary position or paragraph id.
    pub id: usize,
    pub similarity: f64,
}

fn unit(v: &mut [f64]) -> bool {
    let n = dot(v, v).sqrt();
    if n == 0.0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

fn word_vector<F: Scalar>(model: &PvModel<F>, word: &str) -> Result<(usize, Vec<f64>)> {
    let id = model
        .vocab()
        .get(word)
        .ok_or_else(|| Error::UnknownWord(word.to_owned()))?;
    let mut v = vec![0.0; model.config().dim_word];
    model.words().read_row(id, &mut v);
    Ok((id, v))
}

/// Ranks every candidate except `exclude` by cosine similarity to `target`:
/// descending similarity, ties by ascending id.
fn rank<F: Scalar>(model: &PvModel<F>, space: Space, target: &[f64], exclude: &[usize], k: usize) -> Result<Vec<Neighbor>> {
    let matrix = match space {
        Space::Words => model.words(),
        Space::Paragraphs => model.paragraphs(),
    };
    if target.len() != matrix.cols() {
        return Err(Error::InvalidInput(format!(
            "query has {} dimensions, the space has {}",
            target.len(),
            matrix.cols()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let mut q = target.to_vec();
    let q_nonzero = unit(&mut q);
    let mut row = vec![0.0; matrix.cols()];
    let mut out: Vec<Neighbor> = (0..matrix.rows())
        .filter(|&id| !(space == Space::Words && id == NULL_INDEX) && !exclude.contains(&id))
        .map(|id| {
            matrix.read_row(id, &mut row);
            let similarity = if q_nonzero && unit(&mut row) { dot(&q, &row) } else { 0.0 };
            Neighbor { id, similarity }
        })
        .collect();
    out.sort_by(|a, b| {
        b.similarity
            .partial_cmp(&a.similarity)
            .unwrap_or(Ordering::Equal)
            .then(a.id.cmp(&b.id))
    });
    out.truncate(k);
    Ok(out)
}

/// Top-`k` neighbours of `query` in `space` by cosine similarity.
pub fn nearest<F: Scalar>(model: &PvModel<F>, query: &Query<'_>, k: usize, space: Space) -> Result<Vec<Neighbor>> {
    match *query {
        Query::Word(w) => {
            let (id, v) = word_vector(model, w)?;
            let exclude = if space == Space::Words { vec![id] } else { vec![] };
            rank(model, space, &v, &exclude, k)
        }
        Query::Paragraph(pid) => {
            if pid >= model.n_paragraphs() {
                return Err(Error::InvalidInput(format!("no paragraph {pid}")));
            }
            let mut v = vec![0.0; model.config().dim_para];
            model.paragraphs().read_row(pid, &mut v);
            let exclude = if space == Space::Paragraphs { vec![pid] } else { vec![] };
            rank(model, space, &v, &exclude, k)
        }
        Query::Vector(v) => rank(model, space, v, &[], k),
    }
}

/// Words closest to `vec(b) - vec(a) + vec(c)`, excluding the three inputs.
pub fn analogy<F: Scalar>(model: &PvModel<F>, a: &str, b: &str, c: &str, k: usize) -> Result<Vec<Neighbor>> {
    let (ia, va) = word_vector(model, a)?;
    let (ib, vb) = word_vector(model, b)?;
    let (ic, vc) = word_vector(model, c)?;
    let target: Vec<f64> = va.iter().zip(&vb).zip(&vc).map(|((a, b), c)| b - a + c).collect();
    rank(model, Space::Words, &target, &[ia, ib, ic], k)
}
