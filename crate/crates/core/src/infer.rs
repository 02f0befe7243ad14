//! Paragraph vectors for unseen text: gradient descent on a fresh vector
//! with every model parameter frozen.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::encode_tokens;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::model::{random_vector, Gradients, Mode, PvModel};
use crate::scalar::{derive_seed, Scalar};
use crate::train::{context_split, fill_context, window_span};

#[derive(Clone, Debug, PartialEq)]
pub struct InferenceSchedule {
    /// Full passes over the document's windows.
    pub steps: usize,
    pub lr_start: f64,
    pub lr_min: f64,
    pub seed: u64,
    /// Stop early once a pass improves the mean loss by less than this.
    pub tolerance: Option<f64>,
    /// Return a zero vector instead of failing when no token is in vocabulary.
    pub zero_on_empty: bool,
}

impl Default for InferenceSchedule {
    fn default() -> Self {
        InferenceSchedule {
            steps: 50,
            lr_start: 0.025,
            lr_min: 1e-4,
            seed: 1,
            tolerance: None,
            zero_on_empty: false,
        }
    }
}

/// Inferred vector together with the mean loss of every pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Inferred<F> {
    pub vector: Vec<F>,
    pub pass_losses: Vec<f64>,
}

pub fn infer_vector<F: Scalar, S: AsRef<str>>(
    model: &PvModel<F>,
    tokens: &[S],
    schedule: &InferenceSchedule,
) -> Result<Vec<F>> {
    infer_traced(model, tokens, schedule).map(|i| i.vector)
}

pub fn infer_traced<F: Scalar, S: AsRef<str>>(
    model: &PvModel<F>,
    tokens: &[S],
    schedule: &InferenceSchedule,
) -> Result<Inferred<F>> {
    let doc = encode_tokens(tokens, model.vocab());
    infer_encoded(model, &doc, schedule)
}

/// Inference on a document already mapped to vocabulary positions.
pub fn infer_encoded<F: Scalar>(
    model: &PvModel<F>,
    doc: &[usize],
    schedule: &InferenceSchedule,
) -> Result<Inferred<F>> {
    let config = model.config();
    if config.mode == Mode::WordOnly {
        return Err(Error::InvalidConfig(
            "word-only models have no paragraph vectors to infer".into(),
        ));
    }
    if !(schedule.lr_min > 0.0 && schedule.lr_min <= schedule.lr_start) {
        return Err(Error::InvalidConfig("need 0 < lr_min <= lr_start".into()));
    }
    let p = config.dim_para;
    if doc.is_empty() {
        return if schedule.zero_on_empty {
            Ok(Inferred {
                vector: vec![F::zero(); p],
                pass_losses: Vec::new(),
            })
        } else {
            Err(Error::EmptyAfterOov)
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let init: Vec<F> = random_vector(&mut rng, p);
    let mut vector: Vec<f64> = init.iter().map(|x| x.widen()).collect();

    let (left, right) = context_split(config.window, config.symmetric);
    let total = schedule.steps * doc.len();
    let mut processed = 0;
    let mut g = Gradients::default();
    let mut context = Vec::with_capacity(config.window);
    let mut pass_losses = Vec::with_capacity(schedule.steps);

    for _ in 0..schedule.steps {
        let mut loss = 0.0;
        for t in 0..doc.len() {
            let target = if config.mode == Mode::Dbow {
                let (lo, hi) = window_span(doc.len(), t, left, right);
                doc[rng.gen_range(lo..=hi)]
            } else {
                fill_context(doc, t, left, right, &mut context);
                doc[t]
            };
            let frac = processed as f64 / total as f64;
            let lr = schedule.lr_start - (schedule.lr_start - schedule.lr_min) * frac;
            processed += 1;
            model.gradients_for_vector(&vector, &context, target, &mut g);
            loss += g.loss;
            for (v, d) in vector.iter_mut().zip(&g.paragraph_grad) {
                *v -= lr * d;
                if !v.is_finite() {
                    return Err(Error::NonFiniteUpdate);
                }
            }
        }
        let mean = loss / doc.len() as f64;
        let converged = match (schedule.tolerance, pass_losses.last()) {
            (Some(tol), Some(&prev)) => prev - mean < tol,
            _ => false,
        };
        pass_losses.push(mean);
        if converged {
            break;
        }
    }

    let vector = if schedule.steps == 0 {
        init
    } else {
        vector.into_iter().map(F::cast).collect()
    };
    Ok(Inferred {
        vector,
        pass_losses,
    })
}

/// Seed used for document `position` of a batch.
pub fn document_seed(seed: u64, position: usize) -> u64 {
    derive_seed(seed, position as u64)
}

/// Vectors for a batch of documents; failed rows are left at zero and
/// reported in `failures`.
#[derive(Debug)]
pub struct BatchInference<F> {
    pub vectors: DenseMatrix<F>,
    pub failures: Vec<(usize, Error)>,
}

/// Infers every document independently, spreading work over `workers`
/// threads. Output is identical for any worker count.
pub fn infer_batch<F: Scalar, S: AsRef<str> + Sync>(
    model: &PvModel<F>,
    docs: &[Vec<S>],
    schedule: &InferenceSchedule,
    workers: usize,
) -> BatchInference<F> {
    let p = model.config().dim_para;
    let run = |i: usize| {
        let schedule = InferenceSchedule {
            seed: document_seed(schedule.seed, i),
            ..schedule.clone()
        };
        infer_vector(model, &docs[i], &schedule)
    };

    let mut results: Vec<Option<Result<Vec<F>>>> = (0..docs.len()).map(|_| None).collect();
    if workers <= 1 {
        for (i, slot) in results.iter_mut().enumerate() {
            *slot = Some(run(i));
        }
    } else {
        let next = AtomicUsize::new(0);
        let done = Mutex::new(Vec::with_capacity(docs.len()));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= docs.len() {
                            break;
                        }
                        local.push((i, run(i)));
                    }
                    done.lock().unwrap().extend(local);
                });
            }
        });
        for (i, r) in done.into_inner().unwrap() {
            results[i] = Some(r);
        }
    }

    let mut vectors = DenseMatrix::zeros(docs.len(), p);
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r.expect("every document is inferred") {
            Ok(v) => vectors.row_mut(i).copy_from_slice(&v),
            Err(e) => failures.push((i, e)),
        }
    }
    BatchInference { vectors, failures }
}
