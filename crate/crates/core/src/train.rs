//! Epoch-driven SGD over a corpus, sequential or lock-free multi-worker.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Vocabulary, NULL_INDEX};
use crate::error::{Error, Result};
use crate::model::{ContextWindow, Gradients, Mode, ModelConfig, PvModel};
use crate::scalar::{derive_seed, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSchedule {
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_min: f64,
    pub workers: usize,
    pub seed: u64,
    /// Visit documents in a fresh random order each epoch.
    pub shuffle: bool,
    /// Draw windows at random (random paragraph, then random position)
    /// instead of sweeping every position once per epoch.
    pub sampling: bool,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            epochs: 10,
            lr_start: 0.025,
            lr_min: 1e-4,
            workers: 1,
            seed: 1,
            shuffle: true,
            sampling: false,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_start && self.lr_start.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < lr_min <= lr_start, got {} and {}",
                self.lr_min, self.lr_start
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("need at least one worker".into()));
        }
        Ok(())
    }

    /// Learning rate after `processed` of `total` planned windows.
    pub fn learning_rate(&self, processed: usize, total: usize) -> f64 {
        if total == 0 {
            return self.lr_start;
        }
        let frac = (processed as f64 / total as f64).min(1.0);
        self.lr_start - (self.lr_start - self.lr_min) * frac
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub mean_loss: f64,
    pub windows: usize,
    pub seconds: f64,
}

impl fmt::Display for EpochStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{:.6}\t{}\t{:.3}",
            self.epoch, self.mean_loss, self.windows, self.seconds
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub windows_processed: usize,
    pub wall_time: Duration,
}

impl TrainReport {
    pub fn mean_losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }
}

/// Context slots on each side of the target.
pub(crate) fn context_split(window: usize, symmetric: bool) -> (usize, usize) {
    let n = window - 1;
    if symmetric {
        (n - n / 2, n / 2)
    } else {
        (n, 0)
    }
}

/// Writes the context of position `t` into `out`, padding with NULL
/// wherever the window runs off the document.
pub(crate) fn fill_context(doc: &[usize], t: usize, left: usize, right: usize, out: &mut Vec<usize>) {
    out.clear();
    for k in (1..=left).rev() {
        out.push(if t >= k { doc[t - k] } else { NULL_INDEX });
    }
    for k in 1..=right {
        out.push(doc.get(t + k).copied().unwrap_or(NULL_INDEX));
    }
}

/// Span of real token positions covered by the window at `t`.
pub(crate) fn window_span(len: usize, t: usize, left: usize, right: usize) -> (usize, usize) {
    (t.saturating_sub(left), (t + right).min(len - 1))
}

/// One window per token: every token is the target exactly once, with the
/// preceding `window - 1` tokens (NULL padded on the left) as context.
pub fn enumerate_windows(paragraph: usize, doc: &[usize], window: usize) -> Vec<ContextWindow> {
    enumerate_windows_with(paragraph, doc, window, false)
}

/// As [`enumerate_windows`], optionally with a context split around the target.
pub fn enumerate_windows_with(
    paragraph: usize,
    doc: &[usize],
    window: usize,
    symmetric: bool,
) -> Vec<ContextWindow> {
    let (left, right) = context_split(window.max(2), symmetric);
    (0..doc.len())
        .map(|t| {
            let mut context = Vec::with_capacity(window - 1);
            fill_context(doc, t, left, right, &mut context);
            ContextWindow {
                paragraph,
                context,
                target: doc[t],
            }
        })
        .collect()
}

fn check_corpus<F: Scalar>(model: &PvModel<F>, corpus: &Corpus) -> Result<()> {
    if model.config().mode != Mode::WordOnly && corpus.len() != model.n_paragraphs() {
        return Err(Error::InvalidInput(format!(
            "corpus has {} documents but the model has {} paragraph vectors",
            corpus.len(),
            model.n_paragraphs()
        )));
    }
    let m = model.vocab().len();
    if corpus
        .documents()
        .iter()
        .flatten()
        .any(|&t| t == NULL_INDEX || t >= m)
    {
        return Err(Error::InvalidInput(
            "corpus references tokens outside the model vocabulary".into(),
        ));
    }
    Ok(())
}

pub fn train<F: Scalar>(model: &PvModel<F>, corpus: &Corpus, schedule: &TrainSchedule) -> Result<TrainReport> {
    train_with(model, corpus, schedule, |_| {})
}

/// Trains in place, calling `on_epoch` after every epoch.
///
/// With one worker the result is a pure function of the inputs. With more,
/// documents are sharded across threads that update the shared model without
/// locks, so results vary run to run.
pub fn train_with<F: Scalar>(
    model: &PvModel<F>,
    corpus: &Corpus,
    schedule: &TrainSchedule,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainReport> {
    schedule.validate()?;
    check_corpus(model, corpus)?;
    let started = Instant::now();
    let per_epoch = corpus.total_tokens();
    let total = per_epoch * schedule.epochs;
    let processed = AtomicUsize::new(0);
    let mut report = TrainReport::default();

    for epoch in 0..schedule.epochs {
        let epoch_start = Instant::now();
        let epoch_seed = derive_seed(schedule.seed, epoch as u64);
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        if schedule.shuffle {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed));
        }

        let job = |worker: usize, shard: &[usize], steps: usize| Shard {
            model,
            corpus,
            schedule,
            processed: &processed,
            total,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(epoch_seed, 1 + worker as u64)),
        }
        .run(shard, steps);

        let (loss, windows) = if schedule.workers == 1 {
            job(0, &order, per_epoch)?
        } else {
            let chunk = order.len().div_ceil(schedule.workers).max(1);
            let results: Vec<Result<(f64, usize)>> = thread::scope(|s| {
                let handles: Vec<_> = (0..schedule.workers)
                    .map(|w| {
                        let lo = (w * chunk).min(order.len());
                        let hi = ((w + 1) * chunk).min(order.len());
                        let steps = per_epoch / schedule.workers
                            + usize::from(w < per_epoch % schedule.workers);
                        let shard = &order[lo..hi];
                        let job = &job;
                        s.spawn(move || job(w, shard, steps))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
            });
            let mut acc = (0.0, 0);
            for r in results {
                let (l, n) = r?;
                acc.0 += l;
                acc.1 += n;
            }
            acc
        };

        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: if windows > 0 { loss / windows as f64 } else { 0.0 },
            windows,
            seconds: epoch_start.elapsed().as_secs_f64(),
        };
        on_epoch(&stats);
        report.windows_processed += windows;
        report.epochs.push(stats);
    }
    report.wall_time = started.elapsed();
    Ok(report)
}

struct Shard<'a, F: Scalar> {
    model: &'a PvModel<F>,
    corpus: &'a Corpus,
    schedule: &'a TrainSchedule,
    processed: &'a AtomicUsize,
    total: usize,
    rng: ChaCha8Rng,
}

impl<F: Scalar> Shard<'_, F> {
    /// Returns the summed loss and the number of windows trained.
    fn run(mut self, docs: &[usize], steps: usize) -> Result<(f64, usize)> {
        let config = self.model.config().clone();
        let (left, right) = context_split(config.window, config.symmetric);
        let mut g = Gradients::default();
        let mut context = Vec::with_capacity(config.window);
        let (mut loss, mut windows) = (0.0, 0);

        if self.schedule.sampling {
            let nonempty: Vec<usize> = self
                .corpus
                .documents()
                .iter()
                .enumerate()
                .filter(|(_, d)| !d.is_empty())
                .map(|(i, _)| i)
                .collect();
            if nonempty.is_empty() {
                return Ok((0.0, 0));
            }
            for _ in 0..steps {
                let pid = nonempty[self.rng.gen_range(0..nonempty.len())];
                let doc = self.corpus.document(pid);
                let t = self.rng.gen_range(0..doc.len());
                loss += self.step(&config, pid, doc, t, left, right, &mut context, &mut g)?;
                windows += 1;
            }
        } else {
            for &pid in docs {
                let doc = self.corpus.document(pid);
                for t in 0..doc.len() {
                    loss += self.step(&config, pid, doc, t, left, right, &mut context, &mut g)?;
                    windows += 1;
                }
            }
        }
        Ok((loss, windows))
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        config: &ModelConfig,
        pid: usize,
        doc: &[usize],
        t: usize,
        left: usize,
        right: usize,
        context: &mut Vec<usize>,
        g: &mut Gradients,
    ) -> Result<f64> {
        let target = if config.mode == Mode::Dbow {
            let (lo, hi) = window_span(doc.len(), t, left, right);
            doc[self.rng.gen_range(lo..=hi)]
        } else {
            fill_context(doc, t, left, right, context);
            doc[t]
        };
        let lr = self
            .schedule
            .learning_rate(self.processed.fetch_add(1, Ordering::Relaxed), self.total);
        self.model.window_gradients(pid, context, target, g);
        self.model.apply_update(g, lr)?;
        Ok(g.loss)
    }
}

/// A PV-DM and a PV-DBOW model trained on the same corpus.
#[derive(Clone, Debug)]
pub struct TrainedPair<F: Scalar> {
    pub dm: PvModel<F>,
    pub dbow: PvModel<F>,
    pub dm_report: TrainReport,
    pub dbow_report: TrainReport,
}

/// Trains both models independently, each seeded from `schedule.seed`.
pub fn train_pair<F: Scalar>(
    vocab: &Vocabulary,
    corpus: &Corpus,
    dm_config: ModelConfig,
    dbow_config: ModelConfig,
    schedule: &TrainSchedule,
) -> Result<TrainedPair<F>> {
    if dm_config.mode != Mode::Dm || dbow_config.mode != Mode::Dbow {
        return Err(Error::InvalidConfig(
            "train_pair expects a PV-DM and a PV-DBOW configuration".into(),
        ));
    }
    let run = |config: ModelConfig, stream: u64| -> Result<(PvModel<F>, TrainReport)> {
        let seed = derive_seed(schedule.seed, stream);
        let model = PvModel::new(config, vocab.clone(), corpus.len(), seed)?;
        let schedule = TrainSchedule {
            seed,
            ..schedule.clone()
        };
        let report = train(&model, corpus, &schedule)?;
        Ok((model, report))
    };
    let (dm, dm_report) = run(dm_config, 101)?;
    let (dbow, dbow_report) = run(dbow_config, 202)?;
    Ok(TrainedPair {
        dm,
        dbow,
        dm_report,
        dbow_report,
    })
}
