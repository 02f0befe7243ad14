//! Parameters and forward/backward math for PV-DM, PV-DBOW and the
//! word-only model, under a hierarchical or a full softmax output layer.
//!
//! All arithmetic runs in `f64`; parameters are stored as `F`. Methods take
//! `&self` and write through lock-free cells, so several workers may train
//! one model concurrently (lost updates on shared rows are tolerated).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{HuffmanCoding, Vocabulary, NULL_INDEX};
use crate::error::{Error, Result};
use crate::matrix::ParamMatrix;
use crate::scalar::{dot, log_sigmoid, sigmoid, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Distributed memory: paragraph vector plus context words predict the target.
    Dm,
    /// Distributed bag of words: the paragraph vector alone predicts sampled words.
    Dbow,
    /// Context words only, no paragraph vector.
    WordOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Composition {
    Concat,
    Average,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputLayer {
    Hierarchical,
    Full,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    _ => Err(Error::InvalidInput(format!(
                        "unknown {} `{s}`", stringify!($ty).to_lowercase()
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Mode { Mode::Dm => "pv-dm", Mode::Dbow => "pv-dbow", Mode::WordOnly => "word-only" });
keyword_enum!(Composition { Composition::Concat => "concat", Composition::Average => "average" });
keyword_enum!(OutputLayer { OutputLayer::Hierarchical => "hierarchical", OutputLayer::Full => "full" });

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub dim_word: usize,
    pub dim_para: usize,
    /// Context words plus the target; the context holds `window - 1` words.
    pub window: usize,
    pub mode: Mode,
    pub composition: Composition,
    pub output_layer: OutputLayer,
    /// Bias vector of the full softmax. The hierarchical layer has none.
    pub use_bias: bool,
    /// Split the context around the target instead of taking preceding words.
    pub symmetric: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim_word: 100,
            dim_para: 100,
            window: 8,
            mode: Mode::Dm,
            composition: Composition::Concat,
            output_layer: OutputLayer::Hierarchical,
            use_bias: true,
            symmetric: false,
        }
    }
}

impl ModelConfig {
    pub fn pv_dm(dim: usize, window: usize) -> Self {
        ModelConfig {
            dim_word: dim,
            dim_para: dim,
            window,
            ..Self::default()
        }
    }

    pub fn pv_dbow(dim: usize, window: usize) -> Self {
        ModelConfig {
            mode: Mode::Dbow,
            ..Self::pv_dm(dim, window)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_word == 0 || self.dim_para == 0 {
            return Err(Error::InvalidConfig("dimensions must be positive".into()));
        }
        if self.window < 2 {
            return Err(Error::InvalidConfig("window must be at least 2".into()));
        }
        if self.mode == Mode::Dm
            && self.composition == Composition::Average
            && self.dim_para != self.dim_word
        {
            return Err(Error::InvalidConfig(
                "averaging needs equal paragraph and word dimensions".into(),
            ));
        }
        Ok(())
    }

    pub fn context_len(&self) -> usize {
        self.window - 1
    }

    /// Length of the hidden state fed to the output layer.
    pub fn hidden_dim(&self) -> usize {
        match (self.mode, self.composition) {
            (Mode::Dbow, _) => self.dim_para,
            (Mode::Dm, Composition::Concat) => self.dim_para + self.context_len() * self.dim_word,
            (Mode::WordOnly, Composition::Concat) => self.context_len() * self.dim_word,
            (_, Composition::Average) => self.dim_word,
        }
    }
}

/// One training example: a paragraph, its left context (NULL padded) and
/// the word to predict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextWindow {
    pub paragraph: usize,
    pub context: Vec<usize>,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub enum OutputParams<F: Scalar> {
    /// One vector per internal Huffman node.
    Hierarchical { nodes: ParamMatrix<F> },
    /// One row per word (position - 1) plus a bias column vector.
    Full {
        weights: ParamMatrix<F>,
        bias: ParamMatrix<F>,
    },
}

/// Gradients of one example, plus scratch space reused between steps.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    pub loss: f64,
    /// d loss / d hidden state.
    pub hidden: Vec<f64>,
    /// Paragraph row that `paragraph_grad` belongs to.
    pub paragraph: Option<usize>,
    pub paragraph_grad: Vec<f64>,
    /// Word row per context slot; repeated words appear once per slot.
    pub word_rows: Vec<usize>,
    pub word_grads: Vec<f64>,
    /// Touched output rows (Huffman nodes, or word classes for the full layer).
    pub output_rows: Vec<usize>,
    pub output_grads: Vec<f64>,
    /// Full softmax only, aligned with `output_rows`.
    pub bias_grads: Vec<f64>,
    h: Vec<f64>,
    row: Vec<f64>,
    logits: Vec<f64>,
    para: Vec<f64>,
}

impl Gradients {
    /// Sum over context slots of the gradient for word row `row`.
    pub fn word_gradient(&self, row: usize, dim_word: usize) -> Vec<f64> {
        let mut acc = vec![0.0; dim_word];
        for (slot, &r) in self.word_rows.iter().enumerate() {
            if r == row {
                let g = &self.word_grads[slot * dim_word..(slot + 1) * dim_word];
                acc.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
        }
        acc
    }

    /// Gradient for output row `row`, if the example touched it.
    pub fn output_gradient(&self, row: usize) -> Option<&[f64]> {
        let h = self.hidden.len();
        self.output_rows
            .iter()
            .position(|&r| r == row)
            .map(|i| &self.output_grads[i * h..(i + 1) * h])
    }
}

/// Trainable paragraph-vector model.
#[derive(Clone, Debug)]
pub struct PvModel<F: Scalar> {
    config: ModelConfig,
    vocab: Vocabulary,
    huffman: HuffmanCoding,
    words: ParamMatrix<F>,
    paragraphs: ParamMatrix<F>,
    output: OutputParams<F>,
}

impl<F: Scalar> PvModel<F> {
    /// Word and paragraph vectors start uniform in `±0.5 / dim`; output
    /// parameters start at zero.
    pub fn new(config: ModelConfig, vocab: Vocabulary, n_paragraphs: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        if n_paragraphs == 0 {
            return Err(Error::InvalidConfig("need at least one paragraph".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (q, p) = (config.dim_word, config.dim_para);
        let words = ParamMatrix::from_fn(vocab.len(), q, |_, _| uniform_init(&mut rng, q));
        let paragraphs = ParamMatrix::from_fn(n_paragraphs, p, |_, _| uniform_init(&mut rng, p));
        let huffman = HuffmanCoding::build(&vocab);
        let h = config.hidden_dim();
        let output = match config.output_layer {
            OutputLayer::Hierarchical => OutputParams::Hierarchical {
                nodes: ParamMatrix::zeros(huffman.node_count(), h),
            },
            OutputLayer::Full => OutputParams::Full {
                weights: ParamMatrix::zeros(vocab.n_words(), h),
                bias: ParamMatrix::zeros(vocab.n_words(), 1),
            },
        };
        Ok(PvModel {
            config,
            vocab,
            huffman,
            words,
            paragraphs,
            output,
        })
    }

    /// Assembles a model from stored parameters; the Huffman coding is
    /// rebuilt from the vocabulary counts.
    pub fn from_parts(
        config: ModelConfig,
        vocab: Vocabulary,
        words: ParamMatrix<F>,
        paragraphs: ParamMatrix<F>,
        output: OutputParams<F>,
    ) -> Result<Self> {
        config.validate()?;
        let huffman = HuffmanCoding::build(&vocab);
        let h = config.hidden_dim();
        let shape_err = |what: &str| Err(Error::InvalidInput(format!("{what} has the wrong shape")));
        if words.rows() != vocab.len() || words.cols() != config.dim_word {
            return shape_err("word matrix");
        }
        if paragraphs.rows() == 0 || paragraphs.cols() != config.dim_para {
            return shape_err("paragraph matrix");
        }
        match (&output, config.output_layer) {
            (OutputParams::Hierarchical { nodes }, OutputLayer::Hierarchical) => {
                if nodes.rows() != huffman.node_count() || nodes.cols() != h {
                    return shape_err("node matrix");
                }
            }
            (OutputParams::Full { weights, bias }, OutputLayer::Full) => {
                if weights.rows() != vocab.n_words() || weights.cols() != h {
                    return shape_err("output weights");
                }
                if bias.rows() != vocab.n_words() || bias.cols() != 1 {
                    return shape_err("output bias");
                }
            }
            _ => {
                return Err(Error::InvalidInput(
                    "output parameters do not match the configured layer".into(),
                ))
            }
        }
        Ok(PvModel {
            config,
            vocab,
            huffman,
            words,
            paragraphs,
            output,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn huffman(&self) -> &HuffmanCoding {
        &self.huffman
    }

    pub fn words(&self) -> &ParamMatrix<F> {
        &self.words
    }

    pub fn paragraphs(&self) -> &ParamMatrix<F> {
        &self.paragraphs
    }

    pub fn output(&self) -> &OutputParams<F> {
        &self.output
    }

    pub fn n_paragraphs(&self) -> usize {
        self.paragraphs.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.config.hidden_dim()
    }

    /// Input-side trainable scalars: `N * p + M * q` (M counts the NULL row).
    pub fn input_parameter_count(&self) -> usize {
        self.paragraphs.rows() * self.config.dim_para + self.words.rows() * self.config.dim_word
    }

    pub fn all_finite(&self) -> bool {
        let out = match &self.output {
            OutputParams::Hierarchical { nodes } => nodes.all_finite(),
            OutputParams::Full { weights, bias } => weights.all_finite() && bias.all_finite(),
        };
        out && self.words.all_finite() && self.paragraphs.all_finite()
    }

    pub fn check_window(&self, ctx: &ContextWindow) -> Result<()> {
        if ctx.target == NULL_INDEX || ctx.target >= self.vocab.len() {
            return Err(Error::InvalidInput(format!("bad target {}", ctx.target)));
        }
        if self.config.mode != Mode::WordOnly && ctx.paragraph >= self.n_paragraphs() {
            return Err(Error::InvalidInput(format!("bad paragraph {}", ctx.paragraph)));
        }
        if self.config.mode != Mode::Dbow {
            if ctx.context.len() != self.config.context_len() {
                return Err(Error::InvalidInput(format!(
                    "context has {} words, expected {}",
                    ctx.context.len(),
                    self.config.context_len()
                )));
            }
            if ctx.context.iter().any(|&w| w >= self.vocab.len()) {
                return Err(Error::InvalidInput("context word out of range".into()));
            }
        }
        Ok(())
    }

    /// Hidden state for a window, per the configured mode and composition.
    pub fn compose_hidden(&self, ctx: &ContextWindow) -> Vec<f64> {
        let mut para = vec![0.0; self.config.dim_para];
        if self.config.mode != Mode::WordOnly {
            self.paragraphs.read_row(ctx.paragraph, &mut para);
        }
        let mut h = vec![0.0; self.hidden_dim()];
        let mut row = vec![0.0; self.config.dim_word];
        self.compose_into(&para, &ctx.context, &mut h, &mut row);
        h
    }

    fn compose_into(&self, para: &[f64], context: &[usize], h: &mut [f64], row: &mut [f64]) {
        let (p, q) = (self.config.dim_para, self.config.dim_word);
        match (self.config.mode, self.config.composition) {
            (Mode::Dbow, _) => h.copy_from_slice(para),
            (mode, Composition::Concat) => {
                let offset = if mode == Mode::Dm {
                    h[..p].copy_from_slice(para);
                    p
                } else {
                    0
                };
                for (slot, &w) in context.iter().enumerate() {
                    let start = offset + slot * q;
                    self.words.read_row(w, &mut h[start..start + q]);
                }
            }
            (mode, Composition::Average) => {
                let (n, seed): (usize, &[f64]) = if mode == Mode::Dm {
                    (context.len() + 1, para)
                } else {
                    (context.len(), &[])
                };
                h.fill(0.0);
                h.iter_mut().zip(seed).for_each(|(a, b)| *a = *b);
                for &w in context {
                    self.words.read_row(w, row);
                    h.iter_mut().zip(row.iter()).for_each(|(a, b)| *a += b);
                }
                let inv = 1.0 / n as f64;
                h.iter_mut().for_each(|a| *a *= inv);
            }
        }
    }

    /// `ln p(target | h)` under the configured output layer.
    pub fn log_prob(&self, h: &[f64], target: usize) -> f64 {
        match self.output {
            OutputParams::Hierarchical { .. } => self.hs_log_prob(h, target),
            OutputParams::Full { .. } => self.full_softmax_log_prob(h, target),
        }
    }

    /// Sum of log-sigmoid branch decisions along the target's Huffman path.
    pub fn hs_log_prob(&self, h: &[f64], target: usize) -> f64 {
        let OutputParams::Hierarchical { nodes } = &self.output else {
            panic!("hs_log_prob on a full-softmax model");
        };
        let mut row = vec![0.0; h.len()];
        let mut lp = 0.0;
        for (&node, &bit) in self.huffman.path(target).iter().zip(self.huffman.code(target)) {
            nodes.read_row(node, &mut row);
            let x = dot(&row, h);
            lp += log_sigmoid(if bit == 0 { x } else { -x });
        }
        lp
    }

    /// `y_target - logsumexp(y)` with `y = b + U h`.
    pub fn full_softmax_log_prob(&self, h: &[f64], target: usize) -> f64 {
        let OutputParams::Full { weights, bias } = &self.output else {
            panic!("full_softmax_log_prob on a hierarchical model");
        };
        let mut row = vec![0.0; h.len()];
        let logits: Vec<f64> = (0..weights.rows())
            .map(|k| {
                weights.read_row(k, &mut row);
                bias.get(k, 0).widen() + dot(&row, h)
            })
            .collect();
        logits[target - 1] - log_sum_exp(&logits)
    }

    /// Negative log-likelihood of the window's target.
    pub fn context_loss(&self, ctx: &ContextWindow) -> f64 {
        -self.log_prob(&self.compose_hidden(ctx), ctx.target)
    }

    /// Loss and analytic gradients for one window.
    pub fn step_gradients(&self, ctx: &ContextWindow) -> Result<Gradients> {
        let mut g = Gradients::default();
        self.step_gradients_into(ctx, &mut g)?;
        Ok(g)
    }

    pub fn step_gradients_into(&self, ctx: &ContextWindow, g: &mut Gradients) -> Result<()> {
        self.check_window(ctx)?;
        self.window_gradients(ctx.paragraph, &ctx.context, ctx.target, g);
        Ok(())
    }

    /// Gradients for a window of paragraph row `paragraph` (unchecked).
    pub(crate) fn window_gradients(&self, paragraph: usize, context: &[usize], target: usize, g: &mut Gradients) {
        let mut para = std::mem::take(&mut g.para);
        para.resize(self.config.dim_para, 0.0);
        if self.config.mode == Mode::WordOnly {
            g.paragraph = None;
        } else {
            self.paragraphs.read_row(paragraph, &mut para);
            g.paragraph = Some(paragraph);
        }
        self.gradients_for_vector(&para, context, target, g);
        g.para = para;
    }

    /// Gradients with an explicit paragraph vector (used by inference, where
    /// the vector is not a row of the model). Leaves `g.paragraph` alone.
    pub(crate) fn gradients_for_vector(&self, para: &[f64], context: &[usize], target: usize, g: &mut Gradients) {
        let hd = self.hidden_dim();
        let (p, q) = (self.config.dim_para, self.config.dim_word);
        g.h.resize(hd, 0.0);
        g.row.resize(hd.max(q), 0.0);
        let mut h = std::mem::take(&mut g.h);
        let mut row = std::mem::take(&mut g.row);
        self.compose_into(para, context, &mut h, &mut row[..q]);

        g.hidden.clear();
        g.hidden.resize(hd, 0.0);
        g.output_rows.clear();
        g.output_grads.clear();
        g.bias_grads.clear();
        g.loss = match &self.output {
            OutputParams::Hierarchical { nodes } => {
                let mut loss = 0.0;
                let row = &mut row[..hd];
                for (&node, &bit) in self.huffman.path(target).iter().zip(self.huffman.code(target)) {
                    nodes.read_row(node, row);
                    let x = dot(row, &h);
                    let label = if bit == 0 { 1.0 } else { 0.0 };
                    loss -= log_sigmoid(if bit == 0 { x } else { -x });
                    let coef = sigmoid(x) - label;
                    g.hidden.iter_mut().zip(row.iter()).for_each(|(a, v)| *a += coef * v);
                    g.output_rows.push(node);
                    g.output_grads.extend(h.iter().map(|x| coef * x));
                }
                loss
            }
            OutputParams::Full { weights, bias } => {
                let n = weights.rows();
                let row = &mut row[..hd];
                g.logits.clear();
                for k in 0..n {
                    weights.read_row(k, row);
                    g.logits.push(bias.get(k, 0).widen() + dot(row, &h));
                }
                let lse = log_sum_exp(&g.logits);
                let loss = lse - g.logits[target - 1];
                for k in 0..n {
                    let coef = (g.logits[k] - lse).exp() - if k == target - 1 { 1.0 } else { 0.0 };
                    weights.read_row(k, row);
                    g.hidden.iter_mut().zip(row.iter()).for_each(|(a, v)| *a += coef * v);
                    g.output_rows.push(k);
                    g.output_grads.extend(h.iter().map(|x| coef * x));
                    if self.config.use_bias {
                        g.bias_grads.push(coef);
                    }
                }
                loss
            }
        };

        // Scatter d loss / d h back to the input vectors.
        g.word_rows.clear();
        g.word_grads.clear();
        g.paragraph_grad.clear();
        let mode = self.config.mode;
        match (mode, self.config.composition) {
            (Mode::Dbow, _) => g.paragraph_grad.extend_from_slice(&g.hidden),
            (_, Composition::Concat) => {
                let offset = if mode == Mode::Dm {
                    g.paragraph_grad.extend_from_slice(&g.hidden[..p]);
                    p
                } else {
                    0
                };
                for (slot, &w) in context.iter().enumerate() {
                    let start = offset + slot * q;
                    g.word_rows.push(w);
                    g.word_grads.extend_from_slice(&g.hidden[start..start + q]);
                }
            }
            (_, Composition::Average) => {
                let n = context.len() + usize::from(mode == Mode::Dm);
                let inv = 1.0 / n as f64;
                if mode == Mode::Dm {
                    g.paragraph_grad.extend(g.hidden.iter().map(|x| x * inv));
                }
                for &w in context {
                    g.word_rows.push(w);
                    g.word_grads.extend(g.hidden.iter().map(|x| x * inv));
                }
            }
        }
        g.h = h;
        g.row = row;
    }

    /// Sparse SGD step: `theta -= lr * grad` on every touched row only.
    pub fn apply_update(&self, g: &Gradients, lr: f64) -> Result<()> {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate {lr} is not >= 0")));
        }
        self.apply_output_update(g, lr)?;
        let q = self.config.dim_word;
        for (slot, &w) in g.word_rows.iter().enumerate() {
            self.words.descend_row(w, &g.word_grads[slot * q..(slot + 1) * q], lr)?;
        }
        if let Some(pid) = g.paragraph {
            self.paragraphs.descend_row(pid, &g.paragraph_grad, lr)?;
        }
        Ok(())
    }

    fn apply_output_update(&self, g: &Gradients, lr: f64) -> Result<()> {
        let hd = g.hidden.len();
        match &self.output {
            OutputParams::Hierarchical { nodes } => {
                for (i, &r) in g.output_rows.iter().enumerate() {
                    nodes.descend_row(r, &g.output_grads[i * hd..(i + 1) * hd], lr)?;
                }
            }
            OutputParams::Full { weights, bias } => {
                for (i, &r) in g.output_rows.iter().enumerate() {
                    weights.descend_row(r, &g.output_grads[i * hd..(i + 1) * hd], lr)?;
                }
                for (&r, &b) in g.output_rows.iter().zip(&g.bias_grads) {
                    bias.descend_row(r, &[b], lr)?;
                }
            }
        }
        Ok(())
    }
}

fn uniform_init<F: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> F {
    F::cast((rng.gen::<f64>() - 0.5) / dim as f64)
}

pub(crate) fn random_vector<F: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<F> {
    (0..dim).map(|_| uniform_init(rng, dim)).collect()
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
