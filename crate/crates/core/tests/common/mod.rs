//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use paravec::classify::{combine_features, evaluate, train_logreg, FeatureSet, LogRegParams};
use paravec::infer::{infer_batch, InferenceSchedule};
use paravec::matrix::DenseMatrix;
use paravec::model::OutputParams;
use paravec::synth::{synth_corpus, SynthParams};
use paravec::train::{train, TrainReport, TrainSchedule};
use paravec::{Composition, ContextWindow, Corpus, Mode, Model, Model64, ModelConfig, OutputLayer, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MODES: [(Mode, Composition); 4] = [
    (Mode::Dm, Composition::Concat),
    (Mode::Dm, Composition::Average),
    (Mode::Dbow, Composition::Concat),
    (Mode::WordOnly, Composition::Concat),
];

pub const LAYERS: [OutputLayer; 2] = [OutputLayer::Hierarchical, OutputLayer::Full];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vocabulary of `n_words` words with random counts in `1..=max_count`.
pub fn random_vocab(rng: &mut impl Rng, n_words: usize, max_count: u64) -> Vocabulary {
    let docs: Vec<Vec<String>> = (0..n_words)
        .map(|i| {
            let c = rng.gen_range(1..=max_count);
            (0..c).map(|_| format!("w{i}")).collect()
        })
        .collect();
    Vocabulary::build(&docs, 1).unwrap()
}

/// 64-bit model with every parameter (output layer included) drawn from
/// `±scale`, so that gradients are generic rather than at the zero init.
pub fn random_model(
    rng: &mut impl Rng,
    mode: Mode,
    composition: Composition,
    output_layer: OutputLayer,
    scale: f64,
) -> Model64 {
    let q = rng.gen_range(2..=4);
    let p = if composition == Composition::Average { q } else { rng.gen_range(2..=4) };
    let config = ModelConfig {
        dim_word: q,
        dim_para: p,
        window: rng.gen_range(2..=4),
        mode,
        composition,
        output_layer,
        use_bias: rng.gen_bool(0.5),
        symmetric: false,
    };
    let n_words = rng.gen_range(2..=9);
    let vocab = random_vocab(rng, n_words, 20);
    let model = Model64::new(config, vocab, 3, rng.gen()).unwrap();
    let mut fill = |m: &paravec::matrix::ParamMatrix<f64>| {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                m.set(r, c, rng.gen_range(-scale..scale));
            }
        }
    };
    fill(model.words());
    fill(model.paragraphs());
    match model.output() {
        OutputParams::Hierarchical { nodes } => fill(nodes),
        OutputParams::Full { weights, bias } => {
            fill(weights);
            if model.config().use_bias {
                fill(bias);
            }
        }
    }
    model
}

/// A valid window for `model`; context words may repeat and include NULL.
pub fn random_window<F: paravec::Scalar>(rng: &mut impl Rng, model: &paravec::PvModel<F>) -> ContextWindow {
    let m = model.vocab().len();
    ContextWindow {
        paragraph: rng.gen_range(0..model.n_paragraphs()),
        context: (0..model.config().context_len()).map(|_| rng.gen_range(0..m)).collect(),
        target: rng.gen_range(1..m),
    }
}

/// Synthetic two-topic sentiment stand-in: 400 training and 100 held-out
/// documents of 20 tokens over a 100-word vocabulary, noise 0.2. Each
/// document concentrates on 4 words of its topic's 48.
pub struct SentimentData {
    pub vocab: Vocabulary,
    pub train_docs: Vec<Vec<String>>,
    pub train_labels: Vec<usize>,
    pub test_docs: Vec<Vec<String>>,
    pub test_labels: Vec<usize>,
}

pub fn sentiment_data() -> SentimentData {
    let params = SynthParams {
        topics: 2,
        docs_per_topic: 250,
        vocab_per_topic: 48,
        shared_vocab: 4,
        doc_len: 20,
        noise: 0.2,
        focus: 4,
        seed: 5,
    };
    let c = synth_corpus(&params).unwrap();
    let (train_docs, test_docs) = (c.docs[..400].to_vec(), c.docs[400..].to_vec());
    let (train_labels, test_labels) = (c.topics[..400].to_vec(), c.topics[400..].to_vec());
    let vocab = Vocabulary::build(&train_docs, 1).unwrap();
    SentimentData {
        vocab,
        train_docs,
        train_labels,
        test_docs,
        test_labels,
    }
}

/// Learning rate for training and inference on the synthetic corpora.
pub const LR: f64 = 0.1;

pub fn schedule(seed: u64) -> TrainSchedule {
    TrainSchedule {
        epochs: 50,
        lr_start: LR,
        seed,
        ..TrainSchedule::default()
    }
}

pub fn trained(data: &SentimentData, config: ModelConfig, seed: u64) -> (Model, TrainReport) {
    let corpus = Corpus::encode(&data.train_docs, &data.vocab);
    let model = Model::new(config, data.vocab.clone(), corpus.len(), seed).unwrap();
    let report = train(&model, &corpus, &schedule(seed)).unwrap();
    (model, report)
}

/// Training rows are the learned paragraph vectors; held-out rows are inferred.
pub fn features(model: &Model, data: &SentimentData, seed: u64) -> (DenseMatrix<f32>, DenseMatrix<f32>) {
    let p = model.config().dim_para;
    let train = DenseMatrix::from_vec(data.train_docs.len(), p, model.paragraphs().to_vec()).unwrap();
    let schedule = InferenceSchedule {
        seed,
        lr_start: LR,
        ..InferenceSchedule::default()
    };
    let batch = infer_batch(model, &data.test_docs, &schedule, 1);
    assert!(batch.failures.is_empty());
    (train, batch.vectors)
}

/// Held-out error of logistic regression on the concatenated features of `models`.
pub fn held_out_error(models: &[&Model], data: &SentimentData, seed: u64) -> f64 {
    let mut blocks = models.iter().map(|m| features(m, data, seed));
    let (mut train, mut test) = blocks.next().unwrap();
    for (a, b) in blocks {
        train = combine_features(&train, &a).unwrap();
        test = combine_features(&test, &b).unwrap();
    }
    let train = FeatureSet::new(train, data.train_labels.clone()).unwrap();
    let test = FeatureSet::new(test, data.test_labels.clone()).unwrap();
    let clf = train_logreg(&train, &LogRegParams::default()).unwrap();
    evaluate(&clf, &test)
}

/// Largest `|analytic - numeric| / max(1, |analytic|)` over every parameter
/// of the model, using central differences with step `eps`. Parameters the
/// window does not touch must have a zero numeric derivative too.
pub fn max_gradient_error(model: &Model64, ctx: &ContextWindow, eps: f64) -> f64 {
    let g = model.step_gradients(ctx).unwrap();
    assert_eq!(g.loss.to_bits(), model.context_loss(ctx).to_bits());
    let q = model.config().dim_word;
    let mut worst: f64 = 0.0;
    let mut check = |m: &paravec::matrix::ParamMatrix<f64>, analytic: &dyn Fn(usize, usize) -> f64| {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let orig = m.get(r, c);
                m.set(r, c, orig + eps);
                let up = model.context_loss(ctx);
                m.set(r, c, orig - eps);
                let down = model.context_loss(ctx);
                m.set(r, c, orig);
                let numeric = (up - down) / (2.0 * eps);
                let a = analytic(r, c);
                worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
            }
        }
    };
    let word_grads: Vec<Vec<f64>> = (0..model.vocab().len()).map(|w| g.word_gradient(w, q)).collect();
    check(model.words(), &|r, c| word_grads[r][c]);
    check(model.paragraphs(), &|r, c| match g.paragraph {
        Some(pid) if pid == r => g.paragraph_grad[c],
        _ => 0.0,
    });
    match model.output() {
        OutputParams::Hierarchical { nodes } => {
            check(nodes, &|r, c| g.output_gradient(r).map_or(0.0, |row| row[c]));
        }
        OutputParams::Full { weights, bias } => {
            check(weights, &|r, c| g.output_gradient(r).map_or(0.0, |row| row[c]));
            if model.config().use_bias {
                check(bias, &|r, _| {
                    g.output_rows
                        .iter()
                        .position(|&x| x == r)
                        .map_or(0.0, |i| g.bias_grads[i])
                });
            }
        }
    }
    worst
}
