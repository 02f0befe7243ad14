//! Supervised harness on top of paragraph vectors: multinomial logistic
//! regression and a one-hidden-layer network, both trained by SGD.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Feature rows with one class label each.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet<F> {
    features: DenseMatrix<F>,
    labels: Vec<usize>,
}

impl<F: Scalar> FeatureSet<F> {
    pub fn new(features: DenseMatrix<F>, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if !features.as_slice().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(FeatureSet { features, labels })
    }

    pub fn features(&self) -> &DenseMatrix<F> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Appends rows, e.g. auxiliary sub-phrase examples that only ever join
    /// the training side.
    pub fn extend(&mut self, other: &FeatureSet<F>) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::InvalidInput("feature dimensions differ".into()));
        }
        let mut data = std::mem::replace(&mut self.features, DenseMatrix::zeros(0, 0)).into_vec();
        data.extend_from_slice(other.features.as_slice());
        self.features = DenseMatrix::from_vec(self.labels.len() + other.len(), other.dim(), data)?;
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }

    fn require_two_classes(&self) -> Result<()> {
        match self.labels.first() {
            Some(&first) if self.labels.iter().any(|&l| l != first) => Ok(()),
            _ => Err(Error::SingleClass),
        }
    }
}

/// Row-wise concatenation `[dm | dbow]`. A second matrix with no columns
/// leaves the first unchanged.
pub fn combine_features<F: Scalar>(first: &DenseMatrix<F>, second: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
    if second.cols() == 0 {
        return Ok(first.clone());
    }
    if first.rows() != second.rows() {
        return Err(Error::InvalidInput(format!(
            "cannot join {} rows with {} rows",
            first.rows(),
            second.rows()
        )));
    }
    let cols = first.cols() + second.cols();
    let mut data = Vec::with_capacity(first.rows() * cols);
    for (a, b) in first.iter_rows().zip(second.iter_rows()) {
        data.extend_from_slice(a);
        data.extend_from_slice(b);
    }
    DenseMatrix::from_vec(first.rows(), cols, data)
}

pub trait Classifier<F: Scalar> {
    fn n_classes(&self) -> usize;

    /// Unnormalized class scores.
    fn scores(&self, x: &[F]) -> Vec<F>;

    /// Highest-scoring class, ties going to the lower index.
    fn predict(&self, x: &[F]) -> usize {
        let scores = self.scores(x);
        let mut best = 0;
        for (k, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = k;
            }
        }
        best
    }
}

/// Fraction of misclassified rows.
pub fn evaluate<F: Scalar, C: Classifier<F> + ?Sized>(classifier: &C, data: &FeatureSet<F>) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let wrong = data
        .features
        .iter_rows()
        .zip(&data.labels)
        .filter(|(x, &y)| classifier.predict(x) != y)
        .count();
    wrong as f64 / data.len() as f64
}

pub fn accuracy<F: Scalar, C: Classifier<F> + ?Sized>(classifier: &C, data: &FeatureSet<F>) -> f64 {
    1.0 - evaluate(classifier, data)
}

fn softmax_in_place<F: Scalar>(z: &mut [F]) {
    let max = z.iter().copied().fold(F::neg_infinity(), F::max);
    let mut sum = F::zero();
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

fn log_softmax_at<F: Scalar>(z: &[F], k: usize) -> F {
    let max = z.iter().copied().fold(F::neg_infinity(), F::max);
    let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<F>().ln();
    z[k] - lse
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogRegParams {
    pub l2: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// One gradient step per epoch on the whole set instead of per-example SGD.
    pub full_batch: bool,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1e-4,
            epochs: 100,
            lr: 0.1,
            seed: 1,
            full_batch: false,
        }
    }
}

/// Softmax regression: `scores = W x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearClassifier<F> {
    pub n_classes: usize,
    pub dim: usize,
    /// `n_classes x dim`, row-major.
    pub weights: Vec<F>,
    pub bias: Vec<F>,
}

impl<F: Scalar> LinearClassifier<F> {
    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        LinearClassifier {
            n_classes,
            dim,
            weights: vec![F::zero(); n_classes * dim],
            bias: vec![F::zero(); n_classes],
        }
    }

    /// Mean cross-entropy plus `l2 / 2 * |W|^2` (bias unpenalized).
    pub fn objective(&self, data: &FeatureSet<F>, l2: f64) -> f64 {
        let n = data.len().max(1) as f64;
        let ce: f64 = data
            .features
            .iter_rows()
            .zip(&data.labels)
            .map(|(x, &y)| -log_softmax_at(&self.scores(x), y).widen())
            .sum();
        let penalty: f64 = self.weights.iter().map(|w| w.widen().powi(2)).sum();
        ce / n + 0.5 * l2 * penalty
    }

    /// Gradient of [`objective`](Self::objective) as `(d weights, d bias)`.
    pub fn gradient(&self, data: &FeatureSet<F>, l2: f64) -> (Vec<F>, Vec<F>) {
        let mut gw = vec![F::zero(); self.weights.len()];
        let mut gb = vec![F::zero(); self.n_classes];
        let inv_n = F::cast(1.0 / data.len().max(1) as f64);
        for (x, &y) in data.features.iter_rows().zip(&data.labels) {
            self.accumulate(x, y, inv_n, &mut gw, &mut gb);
        }
        let l2 = F::cast(l2);
        for (g, &w) in gw.iter_mut().zip(&self.weights) {
            *g += l2 * w;
        }
        (gw, gb)
    }

    fn accumulate(&self, x: &[F], y: usize, scale: F, gw: &mut [F], gb: &mut [F]) {
        let mut p = self.scores(x);
        softmax_in_place(&mut p);
        for k in 0..self.n_classes {
            let delta = (p[k] - if k == y { F::one() } else { F::zero() }) * scale;
            gb[k] += delta;
            for (g, &xi) in gw[k * self.dim..(k + 1) * self.dim].iter_mut().zip(x) {
                *g += delta * xi;
            }
        }
    }

    fn sgd_step(&mut self, x: &[F], y: usize, lr: F, l2: F) {
        let mut p = self.scores(x);
        softmax_in_place(&mut p);
        for k in 0..self.n_classes {
            let delta = p[k] - if k == y { F::one() } else { F::zero() };
            self.bias[k] -= lr * delta;
            let row = &mut self.weights[k * self.dim..(k + 1) * self.dim];
            for (w, &xi) in row.iter_mut().zip(x) {
                *w -= lr * (delta * xi + l2 * *w);
            }
        }
    }
}

impl<F: Scalar> Classifier<F> for LinearClassifier<F> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn scores(&self, x: &[F]) -> Vec<F> {
        (0..self.n_classes)
            .map(|k| self.bias[k] + dot(&self.weights[k * self.dim..(k + 1) * self.dim], x))
            .collect()
    }
}

pub fn train_logreg<F: Scalar>(data: &FeatureSet<F>, params: &LogRegParams) -> Result<LinearClassifier<F>> {
    let mut clf = LinearClassifier::zeros(data.n_classes(), data.dim());
    fit_logreg(&mut clf, data, params, params.epochs, &mut ChaCha8Rng::seed_from_u64(params.seed))?;
    Ok(clf)
}

fn fit_logreg<F: Scalar>(
    clf: &mut LinearClassifier<F>,
    data: &FeatureSet<F>,
    params: &LogRegParams,
    epochs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    data.require_two_classes()?;
    let (lr, l2) = (F::cast(params.lr), F::cast(params.l2));
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..epochs {
        if params.full_batch {
            let (gw, gb) = clf.gradient(data, params.l2);
            clf.weights.iter_mut().zip(&gw).for_each(|(w, &g)| *w -= lr * g);
            clf.bias.iter_mut().zip(&gb).for_each(|(b, &g)| *b -= lr * g);
        } else {
            order.shuffle(rng);
            for &i in &order {
                clf.sgd_step(data.features.row(i), data.labels[i], lr, l2);
            }
        }
    }
    Ok(())
}

/// Trains with validation-based early stopping and returns the classifier
/// from the best validation epoch.
pub fn train_logreg_early_stop<F: Scalar>(
    train: &FeatureSet<F>,
    validation: &FeatureSet<F>,
    params: &LogRegParams,
    patience: usize,
) -> Result<LinearClassifier<F>> {
    let mut clf = LinearClassifier::zeros(train.n_classes().max(validation.n_classes()), train.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best = (f64::INFINITY, clf.clone());
    let mut since_best = 0;
    for _ in 0..params.epochs {
        fit_logreg(&mut clf, train, params, 1, &mut rng)?;
        let err = evaluate(&clf, validation);
        if err < best.0 {
            best = (err, clf.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > patience {
                break;
            }
        }
    }
    Ok(best.1)
}

/// Picks the L2 strength with the lowest validation error (first wins ties).
pub fn select_l2<F: Scalar>(
    train: &FeatureSet<F>,
    validation: &FeatureSet<F>,
    grid: &[f64],
    params: &LogRegParams,
) -> Result<(f64, LinearClassifier<F>)> {
    let mut best: Option<(f64, f64, LinearClassifier<F>)> = None;
    for &l2 in grid {
        let clf = train_logreg(train, &LogRegParams { l2, ..params.clone() })?;
        let err = evaluate(&clf, validation);
        if best.as_ref().map_or(true, |b| err < b.0) {
            best = Some((err, l2, clf));
        }
    }
    best.map(|(_, l2, clf)| (l2, clf))
        .ok_or_else(|| Error::InvalidConfig("empty L2 grid".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 50,
            epochs: 100,
            lr: 0.05,
            l2: 0.0,
            seed: 1,
        }
    }
}

/// `softmax(W2 tanh(W1 x + b1) + b2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpClassifier<F> {
    pub dim: usize,
    pub hidden: usize,
    pub n_classes: usize,
    /// `hidden x dim`.
    pub w1: Vec<F>,
    pub b1: Vec<F>,
    /// `n_classes x hidden`.
    pub w2: Vec<F>,
    pub b2: Vec<F>,
}

/// Same layout as the classifier's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGradient<F> {
    pub w1: Vec<F>,
    pub b1: Vec<F>,
    pub w2: Vec<F>,
    pub b2: Vec<F>,
}

impl<F: Scalar> MlpClassifier<F> {
    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn new(dim: usize, hidden: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |n: usize, fan_in: usize| -> Vec<F> {
            let a = 1.0 / (fan_in.max(1) as f64).sqrt();
            (0..n).map(|_| F::cast(rng.gen_range(-a..a))).collect()
        };
        MlpClassifier {
            dim,
            hidden,
            n_classes,
            w1: init(hidden * dim, dim),
            b1: vec![F::zero(); hidden],
            w2: init(n_classes * hidden, hidden),
            b2: vec![F::zero(); n_classes],
        }
    }

    fn hidden_activations(&self, x: &[F]) -> Vec<F> {
        (0..self.hidden)
            .map(|j| (self.b1[j] + dot(&self.w1[j * self.dim..(j + 1) * self.dim], x)).tanh())
            .collect()
    }

    fn output_scores(&self, a: &[F]) -> Vec<F> {
        (0..self.n_classes)
            .map(|k| self.b2[k] + dot(&self.w2[k * self.hidden..(k + 1) * self.hidden], a))
            .collect()
    }

    /// Mean cross-entropy plus `l2 / 2` times the squared weights.
    pub fn objective(&self, data: &FeatureSet<F>, l2: f64) -> f64 {
        let n = data.len().max(1) as f64;
        let ce: f64 = data
            .features
            .iter_rows()
            .zip(&data.labels)
            .map(|(x, &y)| -log_softmax_at(&self.scores(x), y).widen())
            .sum();
        let penalty: f64 = self.w1.iter().chain(&self.w2).map(|w| w.widen().powi(2)).sum();
        ce / n + 0.5 * l2 * penalty
    }

    pub fn gradient(&self, data: &FeatureSet<F>, l2: f64) -> MlpGradient<F> {
        let mut g = MlpGradient {
            w1: vec![F::zero(); self.w1.len()],
            b1: vec![F::zero(); self.b1.len()],
            w2: vec![F::zero(); self.w2.len()],
            b2: vec![F::zero(); self.b2.len()],
        };
        let scale = F::cast(1.0 / data.len().max(1) as f64);
        for (x, &y) in data.features.iter_rows().zip(&data.labels) {
            self.backprop(x, y, scale, &mut g);
        }
        let l2 = F::cast(l2);
        g.w1.iter_mut().zip(&self.w1).for_each(|(g, &w)| *g += l2 * w);
        g.w2.iter_mut().zip(&self.w2).for_each(|(g, &w)| *g += l2 * w);
        g
    }

    fn backprop(&self, x: &[F], y: usize, scale: F, g: &mut MlpGradient<F>) {
        let a = self.hidden_activations(x);
        let mut p = self.output_scores(&a);
        softmax_in_place(&mut p);
        let mut da = vec![F::zero(); self.hidden];
        for k in 0..self.n_classes {
            let ds = (p[k] - if k == y { F::one() } else { F::zero() }) * scale;
            g.b2[k] += ds;
            let w2 = &self.w2[k * self.hidden..(k + 1) * self.hidden];
            let g2 = &mut g.w2[k * self.hidden..(k + 1) * self.hidden];
            for j in 0..self.hidden {
                g2[j] += ds * a[j];
                da[j] += ds * w2[j];
            }
        }
        for j in 0..self.hidden {
            let dz = da[j] * (F::one() - a[j] * a[j]);
            g.b1[j] += dz;
            for (gw, &xi) in g.w1[j * self.dim..(j + 1) * self.dim].iter_mut().zip(x) {
                *gw += dz * xi;
            }
        }
    }
}

impl<F: Scalar> Classifier<F> for MlpClassifier<F> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn scores(&self, x: &[F]) -> Vec<F> {
        self.output_scores(&self.hidden_activations(x))
    }
}

pub fn train_mlp<F: Scalar>(data: &FeatureSet<F>, params: &MlpParams) -> Result<MlpClassifier<F>> {
    data.require_two_classes()?;
    let mut clf = MlpClassifier::new(data.dim(), params.hidden, data.n_classes(), params.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(1));
    let (lr, l2) = (F::cast(params.lr), F::cast(params.l2));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut g = MlpGradient {
        w1: vec![F::zero(); clf.w1.len()],
        b1: vec![F::zero(); clf.b1.len()],
        w2: vec![F::zero(); clf.w2.len()],
        b2: vec![F::zero(); clf.b2.len()],
    };
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            for v in [&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2] {
                v.fill(F::zero());
            }
            clf.backprop(data.features.row(i), data.labels[i], F::one(), &mut g);
            for (w, &d) in clf.w1.iter_mut().zip(&g.w1) {
                *w -= lr * (d + l2 * *w);
            }
            for (w, &d) in clf.w2.iter_mut().zip(&g.w2) {
                *w -= lr * (d + l2 * *w);
            }
            clf.b1.iter_mut().zip(&g.b1).for_each(|(b, &d)| *b -= lr * d);
            clf.b2.iter_mut().zip(&g.b2).for_each(|(b, &d)| *b -= lr * d);
        }
    }
    Ok(clf)
}

/// Sentiment label granularity for scores in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Granularity {
    /// Five classes cut at 0.2, 0.4, 0.6, 0.8.
    Fine,
    /// Negative `<= 0.4`, positive `> 0.6`; neutral scores are dropped.
    Coarse,
}

pub fn bin_sentiment(score: f64, granularity: Granularity) -> Option<usize> {
    if !(0.0..=1.0).contains(&score) {
        return None;
    }
    match granularity {
        Granularity::Fine => Some([0.2, 0.4, 0.6, 0.8].iter().filter(|&&c| score > c).count()),
        Granularity::Coarse if score <= 0.4 => Some(0),
        Granularity::Coarse if score > 0.6 => Some(1),
        Granularity::Coarse => None,
    }
}
