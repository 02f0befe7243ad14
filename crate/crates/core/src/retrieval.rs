//! Triplet retrieval evaluation: a method errs on `(anchor, positive,
//! negative)` when the anchor is not strictly closer to the positive.
//!
//! Feature baselines: TF-IDF over unigrams or unigrams plus bigrams, a
//! learned linear projection of the bigram features, and word-vector
//! averaging. Paragraph-vector features come from [`crate::infer`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::encode_tokens;
use crate::error::{Error, Result};
use crate::matrix::{sparse_dot, sparse_sub, DenseMatrix, SparseMatrix};
use crate::model::PvModel;
use crate::scalar::{cosine, derive_seed, Scalar};
use crate::synth::{synth_corpus, SynthCorpus, SynthParams};

/// Joins the two halves of a bigram term; never produced by the tokenizer.
pub const BIGRAM_SEPARATOR: char = '\u{1f}';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

impl Triplet {
    pub fn new(anchor: usize, positive: usize, negative: usize) -> Result<Self> {
        if anchor == positive || anchor == negative || positive == negative {
            return Err(Error::InvalidInput(format!(
                "triplet ({anchor}, {positive}, {negative}) repeats a document"
            )));
        }
        Ok(Triplet {
            anchor,
            positive,
            negative,
        })
    }
}

/// Triplets split 80/10/10 into train, validation and test.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TripletSet {
    pub train: Vec<Triplet>,
    pub validation: Vec<Triplet>,
    pub test: Vec<Triplet>,
}

impl TripletSet {
    /// Splits in order: the first 80% train, the next 10% validate.
    pub fn split(triplets: Vec<Triplet>) -> Self {
        let n = triplets.len();
        let n_train = (n as f64 * 0.8).round() as usize;
        let n_val = (n as f64 * 0.1).round() as usize;
        let mut rest = triplets;
        let test = rest.split_off((n_train + n_val).min(n));
        let validation = rest.split_off(n_train.min(rest.len()));
        TripletSet {
            train: rest,
            validation,
            test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> impl Iterator<Item = &Triplet> {
        self.train.iter().chain(&self.validation).chain(&self.test)
    }

    /// Documents referenced by the training triplets, ascending.
    pub fn train_documents(&self) -> Vec<usize> {
        self.train
            .iter()
            .flat_map(|t| [t.anchor, t.positive, t.negative])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Three tab-separated document indices per line, train first.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in self.all() {
            writeln!(out, "{}\t{}\t{}", t.anchor, t.positive, t.negative)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut triplets = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ids: Vec<usize> = line
                .split('\t')
                .map(|f| f.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidInput(format!("triplet line {}: `{line}`", i + 1)))?;
            let [a, p, n] = ids[..] else {
                return Err(Error::InvalidInput(format!(
                    "triplet line {} needs three fields",
                    i + 1
                )));
            };
            triplets.push(Triplet::new(a, p, n)?);
        }
        Ok(Self::split(triplets))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Distance {
    /// `1 - cosine similarity`; zero vectors have similarity 0.
    #[default]
    Cosine,
    Euclidean,
}

/// Anything that can measure the distance between two of its rows.
pub trait PairDistance {
    fn n_items(&self) -> usize;
    fn distance(&self, a: usize, b: usize, metric: Distance) -> f64;
}

impl PairDistance for SparseMatrix {
    fn n_items(&self) -> usize {
        self.rows.len()
    }

    fn distance(&self, a: usize, b: usize, metric: Distance) -> f64 {
        let (ra, rb) = (self.row(a), self.row(b));
        let ab = sparse_dot(ra, rb);
        let aa = sparse_dot(ra, ra);
        let bb = sparse_dot(rb, rb);
        match metric {
            Distance::Cosine if aa == 0.0 || bb == 0.0 => 1.0,
            Distance::Cosine => 1.0 - ab / (aa.sqrt() * bb.sqrt()),
            Distance::Euclidean => (aa + bb - 2.0 * ab).max(0.0).sqrt(),
        }
    }
}

impl<F: Scalar> PairDistance for DenseMatrix<F> {
    fn n_items(&self) -> usize {
        self.rows()
    }

    fn distance(&self, a: usize, b: usize, metric: Distance) -> f64 {
        let (ra, rb) = (self.row(a), self.row(b));
        match metric {
            Distance::Cosine => 1.0 - cosine(ra, rb),
            Distance::Euclidean => ra
                .iter()
                .zip(rb)
                .map(|(&x, &y)| (x.widen() - y.widen()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Fraction of triplets where `d(anchor, positive) >= d(anchor, negative)`.
/// Ties count as errors.
pub fn triplet_error<D: PairDistance + ?Sized>(features: &D, triplets: &[Triplet], metric: Distance) -> f64 {
    if triplets.is_empty() {
        return 0.0;
    }
    let errors = triplets
        .iter()
        .filter(|t| {
            features.distance(t.anchor, t.positive, metric)
                >= features.distance(t.anchor, t.negative, metric)
        })
        .count();
    errors as f64 / triplets.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitErrors {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

pub fn split_errors<D: PairDistance + ?Sized>(features: &D, set: &TripletSet, metric: Distance) -> SplitErrors {
    SplitErrors {
        train: triplet_error(features, &set.train, metric),
        validation: triplet_error(features, &set.validation, metric),
        test: triplet_error(features, &set.test, metric),
    }
}

/// Fitted TF-IDF weighting: raw counts times `ln((1 + N) / (1 + df)) + 1`,
/// rows L2-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct TfIdf {
    ngram: usize,
    terms: HashMap<String, usize>,
    idf: Vec<f64>,
}

fn terms_of<S: AsRef<str>>(doc: &[S], ngram: usize) -> Vec<String> {
    let mut out: Vec<String> = doc.iter().map(|t| t.as_ref().to_owned()).collect();
    if ngram >= 2 {
        out.extend(
            doc.windows(2)
                .map(|w| format!("{}{BIGRAM_SEPARATOR}{}", w[0].as_ref(), w[1].as_ref())),
        );
    }
    out
}

impl TfIdf {
    /// Fits on every document.
    pub fn fit<S: AsRef<str>>(docs: &[Vec<S>], ngram: usize) -> Result<Self> {
        let all: Vec<usize> = (0..docs.len()).collect();
        Self::fit_on(docs, &all, ngram)
    }

    /// Fits on the listed documents only.
    pub fn fit_on<S: AsRef<str>>(docs: &[Vec<S>], subset: &[usize], ngram: usize) -> Result<Self> {
        if !(1..=2).contains(&ngram) {
            return Err(Error::InvalidConfig("ngram must be 1 or 2".into()));
        }
        if subset.is_empty() {
            return Err(Error::InvalidInput("cannot fit TF-IDF on no documents".into()));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for &i in subset {
            let distinct: BTreeSet<String> = terms_of(&docs[i], ngram).into_iter().collect();
            for term in distinct {
                *df.entry(term).or_default() += 1;
            }
        }
        let mut sorted: Vec<(String, usize)> = df.into_iter().collect();
        sorted.sort();
        let n = subset.len() as f64;
        let idf = sorted
            .iter()
            .map(|(_, d)| ((1.0 + n) / (1.0 + *d as f64)).ln() + 1.0)
            .collect();
        let terms = sorted
            .into_iter()
            .enumerate()
            .map(|(i, (t, _))| (t, i))
            .collect();
        Ok(TfIdf { ngram, terms, idf })
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.terms.get(term).map(|&i| self.idf[i])
    }

    /// Unseen terms are ignored.
    pub fn transform<S: AsRef<str>>(&self, docs: &[Vec<S>]) -> SparseMatrix {
        let rows = docs
            .iter()
            .map(|doc| {
                let mut counts: HashMap<usize, f64> = HashMap::new();
                for term in terms_of(doc, self.ngram) {
                    if let Some(&i) = self.terms.get(&term) {
                        *counts.entry(i).or_default() += 1.0;
                    }
                }
                let mut row: Vec<(usize, f64)> =
                    counts.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
                row.sort_unstable_by_key(|e| e.0);
                let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|e| e.1 /= norm);
                }
                row
            })
            .collect();
        SparseMatrix {
            cols: self.dim(),
            rows,
        }
    }
}

/// Fits TF-IDF on `docs` and transforms them.
pub fn tfidf_features<S: AsRef<str>>(docs: &[Vec<S>], ngram: usize) -> Result<SparseMatrix> {
    Ok(TfIdf::fit(docs, ngram)?.transform(docs))
}

/// Unweighted mean of each document's in-vocabulary word vectors; zero for
/// documents with none.
pub fn vector_average_features<F: Scalar, S: AsRef<str>>(model: &PvModel<F>, docs: &[Vec<S>]) -> DenseMatrix<F> {
    let q = model.config().dim_word;
    let mut out = DenseMatrix::zeros(docs.len(), q);
    let mut row = vec![0.0; q];
    for (i, doc) in docs.iter().enumerate() {
        let ids = encode_tokens(doc, model.vocab());
        if ids.is_empty() {
            continue;
        }
        let mut acc = vec![0.0; q];
        for &w in &ids {
            model.words().read_row(w, &mut row);
            acc.iter_mut().zip(&row).for_each(|(a, r)| *a += r);
        }
        let inv = 1.0 / ids.len() as f64;
        for (o, a) in out.row_mut(i).iter_mut().zip(&acc) {
            *o = F::cast(a * inv);
        }
    }
    out
}

/// Linear map `A` from sparse features to `out_dim` dense coordinates,
/// stored one `out_dim` column per input feature.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    pub in_dim: usize,
    pub out_dim: usize,
    pub columns: Vec<f64>,
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        let mut columns = vec![0.0; dim * dim];
        for j in 0..dim {
            columns[j * dim + j] = 1.0;
        }
        LinearMap {
            in_dim: dim,
            out_dim: dim,
            columns,
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.out_dim..(j + 1) * self.out_dim]
    }

    pub fn apply(&self, x: &[(usize, f64)]) -> Vec<f64> {
        let mut y = vec![0.0; self.out_dim];
        for &(j, v) in x {
            if j < self.in_dim {
                y.iter_mut().zip(self.column(j)).for_each(|(a, c)| *a += v * c);
            }
        }
        y
    }

    pub fn project(&self, features: &SparseMatrix) -> DenseMatrix<f64> {
        let mut out = DenseMatrix::zeros(features.n_rows(), self.out_dim);
        for i in 0..features.n_rows() {
            out.row_mut(i).copy_from_slice(&self.apply(features.row(i)));
        }
        out
    }
}

/// `sum |A(x_a - x_p)|^2 - lambda |A(x_a - x_n)|^2` over the triplets.
pub fn projection_objective(map: &LinearMap, features: &SparseMatrix, triplets: &[Triplet], lambda: f64) -> f64 {
    triplets
        .iter()
        .map(|t| {
            let (u, v) = triplet_diffs(features, t);
            squared(&map.apply(&u)) - lambda * squared(&map.apply(&v))
        })
        .sum()
}

/// Dense gradient of [`projection_objective`], laid out like `map.columns`.
pub fn projection_gradient(map: &LinearMap, features: &SparseMatrix, triplets: &[Triplet], lambda: f64) -> Vec<f64> {
    let mut grad = vec![0.0; map.columns.len()];
    let k = map.out_dim;
    for t in triplets {
        let (u, v) = triplet_diffs(features, t);
        for (diff, weight) in [(&u, 2.0), (&v, -2.0 * lambda)] {
            let image = map.apply(diff);
            for &(j, x) in diff.iter() {
                for (g, y) in grad[j * k..(j + 1) * k].iter_mut().zip(&image) {
                    *g += weight * x * y;
                }
            }
        }
    }
    grad
}

fn triplet_diffs(features: &SparseMatrix, t: &Triplet) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let a = features.row(t.anchor);
    (
        sparse_sub(a, features.row(t.positive)),
        sparse_sub(a, features.row(t.negative)),
    )
}

fn squared(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionParams {
    pub proj_dim: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            proj_dim: 128,
            lambda: 0.5,
            epochs: 10,
            lr: 0.05,
            seed: 1,
        }
    }
}

/// SGD on [`projection_objective`].
///
/// The objective is unbounded below for `lambda > 0`, so `A` is kept inside
/// the Frobenius ball of its random initialization (cosine distances do not
/// depend on the scale of `A`).
pub fn fit_projection(features: &SparseMatrix, triplets: &[Triplet], params: &ProjectionParams) -> Result<LinearMap> {
    if params.proj_dim == 0 {
        return Err(Error::InvalidConfig("projection dimension must be positive".into()));
    }
    let (d, k) = (features.cols, params.proj_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let a = (3.0 / k as f64).sqrt();
    // A = scale * stored
    let mut stored: Vec<f64> = (0..d * k).map(|_| rng.gen_range(-a..a)).collect();
    let mut scale = 1.0;
    let mut stored_sq: f64 = squared(&stored);
    let radius_sq = stored_sq;

    let mut order: Vec<usize> = (0..triplets.len()).collect();
    let mut image = vec![0.0; k];
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (u, v) = triplet_diffs(features, &triplets[i]);
            let mut loss = 0.0;
            let mut steps: Vec<(usize, f64, Vec<f64>)> = Vec::new();
            for (diff, weight) in [(&u, 2.0), (&v, -2.0 * params.lambda)] {
                image.fill(0.0);
                for &(j, x) in diff.iter() {
                    let col = &stored[j * k..(j + 1) * k];
                    image.iter_mut().zip(col).for_each(|(y, c)| *y += scale * x * c);
                }
                loss += weight / 2.0 * squared(&image);
                for &(j, x) in diff.iter() {
                    steps.push((j, weight * x, image.clone()));
                }
            }
            if !loss.is_finite() {
                return Err(Error::Degenerate);
            }
            for (j, coef, img) in steps {
                let col = &mut stored[j * k..(j + 1) * k];
                stored_sq -= squared(col);
                for (c, y) in col.iter_mut().zip(&img) {
                    *c -= params.lr * coef * y / scale;
                }
                stored_sq += squared(col);
            }
            let norm_sq = scale * scale * stored_sq;
            if !norm_sq.is_finite() {
                return Err(Error::Degenerate);
            }
            if norm_sq > radius_sq {
                scale *= (radius_sq / norm_sq).sqrt();
            }
            if scale < 1e-6 {
                stored.iter_mut().for_each(|c| *c *= scale);
                stored_sq = squared(&stored);
                scale = 1.0;
            }
        }
    }
    stored.iter_mut().for_each(|c| *c *= scale);
    Ok(LinearMap {
        in_dim: d,
        out_dim: k,
        columns: stored,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBigramParams {
    pub proj_dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for WeightedBigramParams {
    fn default() -> Self {
        WeightedBigramParams {
            proj_dims: vec![128],
            lambdas: vec![0.0, 0.25, 0.5, 1.0],
            epochs: 10,
            lr: 0.05,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightedBigram {
    pub map: LinearMap,
    pub proj_dim: usize,
    pub lambda: f64,
    pub validation_error: f64,
}

/// Learns projections over the `(proj_dim, lambda)` grid on the training
/// triplets and keeps the one with the lowest validation error.
pub fn learn_weighted_bigram(
    features: &SparseMatrix,
    train: &[Triplet],
    validation: &[Triplet],
    params: &WeightedBigramParams,
) -> Result<WeightedBigram> {
    let mut best: Option<WeightedBigram> = None;
    for &proj_dim in &params.proj_dims {
        for &lambda in &params.lambdas {
            let map = fit_projection(
                features,
                train,
                &ProjectionParams {
                    proj_dim,
                    lambda,
                    epochs: params.epochs,
                    lr: params.lr,
                    seed: params.seed,
                },
            )?;
            let err = triplet_error(&map.project(features), validation, Distance::Cosine);
            if best.as_ref().map_or(true, |b| err < b.validation_error) {
                best = Some(WeightedBigram {
                    map,
                    proj_dim,
                    lambda,
                    validation_error: err,
                });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("empty hyperparameter grid".into()))
}

/// Synthetic topic corpus plus triplets: anchor and positive share a topic,
/// the negative comes from a different topic. Split 80/10/10.
pub fn synth_triplets(params: &SynthParams, n_triplets: usize) -> Result<(SynthCorpus, TripletSet)> {
    if params.topics < 2 {
        return Err(Error::NoNegativePool);
    }
    if params.docs_per_topic < 2 {
        return Err(Error::InvalidInput("need two documents per topic".into()));
    }
    let corpus = synth_corpus(params)?;
    let mut by_topic = vec![Vec::new(); params.topics];
    for (i, &t) in corpus.topics.iter().enumerate() {
        by_topic[t].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, 0x7219));
    let mut triplets = Vec::with_capacity(n_triplets);
    for _ in 0..n_triplets {
        let topic = rng.gen_range(0..params.topics);
        let pair: Vec<usize> = by_topic[topic].choose_multiple(&mut rng, 2).copied().collect();
        let other = (topic + rng.gen_range(1..params.topics)) % params.topics;
        let negative = *by_topic[other].choose(&mut rng).expect("topics are non-empty");
        triplets.push(Triplet::new(pair[0], pair[1], negative)?);
    }
    Ok((corpus, TripletSet::split(triplets)))
}

/// Feature methods of the triplet evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    TfIdfUnigram,
    TfIdfBigram,
    WeightedBigram,
    VectorAverage,
    ParagraphVector,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TfIdfUnigram => "tfidf1",
            Method::TfIdfBigram => "tfidf2",
            Method::WeightedBigram => "wbigram",
            Method::VectorAverage => "avg",
            Method::ParagraphVector => "pv",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Method::TfIdfUnigram,
            Method::TfIdfBigram,
            Method::WeightedBigram,
            Method::VectorAverage,
            Method::ParagraphVector,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))
    }
}

/// Evaluates one of the TF-IDF based methods, fitting only on documents of
/// the training triplets.
pub fn evaluate_lexical<S: AsRef<str>>(
    method: Method,
    docs: &[Vec<S>],
    set: &TripletSet,
    wbigram: &WeightedBigramParams,
) -> Result<SplitErrors> {
    let ngram = if method == Method::TfIdfUnigram { 1 } else { 2 };
    let tfidf = TfIdf::fit_on(docs, &set.train_documents(), ngram)?;
    let features = tfidf.transform(docs);
    match method {
        Method::TfIdfUnigram | Method::TfIdfBigram => Ok(split_errors(&features, set, Distance::Cosine)),
        Method::WeightedBigram => {
            let learned = learn_weighted_bigram(&features, &set.train, &set.validation, wbigram)?;
            Ok(split_errors(&learned.map.project(&features), set, Distance::Cosine))
        }
        _ => Err(Error::InvalidInput(format!("{method} needs a trained model"))),
    }
}
