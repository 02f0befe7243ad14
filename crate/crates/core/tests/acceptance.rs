//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use paravec::classify::{accuracy, evaluate, train_logreg, train_mlp, FeatureSet, LogRegParams, MlpParams};
use paravec::corpus::HuffmanCoding;
use paravec::infer::{infer_batch, InferenceSchedule};
use paravec::matrix::DenseMatrix;
use paravec::persist::{load_model, model_to_bytes};
use paravec::retrieval::{evaluate_lexical, split_errors, synth_triplets, Distance, Method, WeightedBigramParams};
use paravec::synth::SynthParams;
use paravec::train::train;
use paravec::{Composition, Corpus, Model, Model64, ModelConfig, Vocabulary};
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_correctness() -> Outcome {
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for (mode, composition) in MODES {
        for layer in LAYERS {
            for _ in 0..25 {
                let model = random_model(&mut rng, mode, composition, layer, 0.5);
                let ctx = random_window(&mut rng, &model);
                worst = worst.max(max_gradient_error(&model, &ctx, 1e-5));
                instances += 1;
            }
        }
    }
    ensure(worst < 1e-4, format!("{instances} instances, max relative error {worst:.2e} (bound 1e-4)"))
}

fn normalization() -> Outcome {
    let mut rng = rng(2);
    let mut worst: f64 = 0.0;
    for layer in LAYERS {
        for _ in 0..10 {
            let n = rng.gen_range(1..=199);
            let vocab = random_vocab(&mut rng, n, 1000);
            let config = ModelConfig {
                output_layer: layer,
                ..ModelConfig::pv_dbow(6, 2)
            };
            let model = Model64::new(config, vocab, 1, rng.gen()).unwrap();
            let fill = |m: &paravec::matrix::ParamMatrix<f64>, rng: &mut rand_chacha::ChaCha8Rng| {
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        m.set(r, c, rng.gen_range(-2.0..2.0));
                    }
                }
            };
            match model.output() {
                paravec::model::OutputParams::Hierarchical { nodes } => fill(nodes, &mut rng),
                paravec::model::OutputParams::Full { weights, bias } => {
                    fill(weights, &mut rng);
                    fill(bias, &mut rng);
                }
            }
            let h: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let total: f64 = (1..=n).map(|w| model.log_prob(&h, w).exp()).sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    ensure(worst <= 1e-8, format!("20 models, max |sum p - 1| = {worst:.2e} (bound 1e-8)"))
}

fn huffman_properties() -> Outcome {
    let mut rng = rng(3);
    for profile in 0..100 {
        let n = rng.gen_range(1..=500);
        let counts: Vec<u64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { rng.gen_range(1..5) } else { rng.gen_range(1..100_000) })
            .collect();
        let h = HuffmanCoding::from_word_counts(&counts);
        let codes: Vec<&[u8]> = (1..=n).map(|w| h.code(w)).collect();
        for (i, a) in codes.iter().enumerate() {
            for (j, b) in codes.iter().enumerate() {
                if i != j && b.starts_with(a) {
                    return Err(format!("profile {profile}: code {i} is a prefix of code {j}"));
                }
            }
        }
        // Kraft sum in exact arithmetic: sum 2^(L - len) == 2^L.
        let max_len = codes.iter().map(|c| c.len()).max().unwrap();
        if max_len > 120 {
            return Err(format!("profile {profile}: code length {max_len} too long to check"));
        }
        let kraft: u128 = codes.iter().map(|c| 1u128 << (max_len - c.len())).sum();
        if n > 1 && kraft != 1u128 << max_len {
            return Err(format!("profile {profile}: Kraft sum is not 1"));
        }
        for i in 0..n {
            for j in 0..n {
                if counts[i] > counts[j] && codes[i].len() > codes[j].len() {
                    return Err(format!("profile {profile}: more frequent word has a longer code"));
                }
            }
        }
    }
    let example = HuffmanCoding::from_word_counts(&[4, 2, 1, 1]);
    let lengths: Vec<usize> = (1..=4).map(|w| example.code(w).len()).collect();
    ensure(
        lengths == [1, 2, 3, 3],
        format!("100 profiles prefix-free, Kraft-complete, monotone; worked example lengths {lengths:?}"),
    )
}

fn frozen_inference() -> Outcome {
    let data = sentiment_data();
    let docs: Vec<Vec<String>> = data.train_docs.iter().chain(&data.test_docs).take(100).cloned().collect();
    let corpus = Corpus::encode(&data.train_docs[..50], &data.vocab);
    let mut checked = Vec::new();
    for layer in LAYERS {
        let config = ModelConfig {
            output_layer: layer,
            ..ModelConfig::pv_dm(16, 5)
        };
        let model = Model::new(config, data.vocab.clone(), corpus.len(), 4).unwrap();
        let schedule = paravec::train::TrainSchedule {
            epochs: 2,
            ..Default::default()
        };
        train(&model, &corpus, &schedule).unwrap();
        let before = model_to_bytes(&model);
        let batch = infer_batch(&model, &docs, &InferenceSchedule::default(), 2);
        if !batch.failures.is_empty() || batch.vectors.rows() != 100 {
            return Err("inference failed".into());
        }
        if model_to_bytes(&model) != before {
            return Err(format!("{layer} model changed during inference"));
        }
        checked.push(layer.to_string());
    }
    Ok(format!("model bytes unchanged after inferring 100 documents ({})", checked.join(", ")))
}

fn end_to_end_sentiment() -> Outcome {
    let data = sentiment_data();
    let (dm, _) = trained(&data, ModelConfig::pv_dm(32, 5), 11);
    let (dbow, _) = trained(&data, ModelConfig::pv_dbow(32, 5), 12);
    let err = held_out_error(&[&dm, &dbow], &data, 13);
    ensure(
        err <= 0.05,
        format!("vocab {}, held-out error {:.1}% (bound 5%)", data.vocab.n_words(), 100.0 * err),
    )
}

fn triplet_ordering() -> Outcome {
    let params = SynthParams {
        topics: 5,
        docs_per_topic: 100,
        noise: 0.3,
        seed: 11,
        ..SynthParams::default()
    };
    let (synth, set) = synth_triplets(&params, 1000).unwrap();
    let vocab = Vocabulary::build(&synth.docs, 1).unwrap();
    let corpus = Corpus::encode(&synth.docs, &vocab);
    let mut blocks = Vec::new();
    for (i, config) in [ModelConfig::pv_dm(32, 5), ModelConfig::pv_dbow(32, 5)].into_iter().enumerate() {
        let model = Model::new(config, vocab.clone(), corpus.len(), 21 + i as u64).unwrap();
        let schedule = paravec::train::TrainSchedule {
            epochs: 50,
            seed: 21 + i as u64,
            ..Default::default()
        };
        train(&model, &corpus, &schedule).unwrap();
        blocks.push(DenseMatrix::from_vec(corpus.len(), 32, model.paragraphs().to_vec()).unwrap());
    }
    let pv = paravec::classify::combine_features(&blocks[0], &blocks[1]).unwrap();
    let pv_err = split_errors(&pv, &set, Distance::Cosine).test;
    let wb = WeightedBigramParams::default();
    let uni = evaluate_lexical(Method::TfIdfUnigram, &synth.docs, &set, &wb).unwrap().test;
    let bi = evaluate_lexical(Method::TfIdfBigram, &synth.docs, &set, &wb).unwrap().test;
    ensure(
        pv_err <= 0.10 && bi <= uni + 0.02,
        format!(
            "test triplets: pv {:.1}% (bound 10%), tfidf2 {:.1}% vs tfidf1 {:.1}% (+2 points allowed)",
            100.0 * pv_err,
            100.0 * bi,
            100.0 * uni
        ),
    )
}

fn concat_vs_average() -> Outcome {
    let data = sentiment_data();
    let mut rows = Vec::new();
    let mut ok = true;
    for seed in [31, 32, 33] {
        let (concat, _) = trained(&data, ModelConfig::pv_dm(32, 5), seed);
        let average_config = ModelConfig {
            composition: Composition::Average,
            ..ModelConfig::pv_dm(32, 5)
        };
        let (average, _) = trained(&data, average_config, seed);
        let c = held_out_error(&[&concat], &data, seed);
        let a = held_out_error(&[&average], &data, seed);
        ok &= c <= a + 0.02;
        rows.push(format!("seed {seed}: concat {:.1}% average {:.1}%", 100.0 * c, 100.0 * a));
    }
    ensure(ok, rows.join("; "))
}

fn determinism() -> Outcome {
    let data = sentiment_data();
    let corpus = Corpus::encode(&data.train_docs[..100], &data.vocab);
    let run = || {
        let model = Model::new(ModelConfig::pv_dm(16, 5), data.vocab.clone(), corpus.len(), 9).unwrap();
        let schedule = paravec::train::TrainSchedule {
            epochs: 3,
            seed: 9,
            ..Default::default()
        };
        train(&model, &corpus, &schedule).unwrap();
        let vectors = infer_batch(&model, &data.test_docs, &InferenceSchedule::default(), 1).vectors;
        (model_to_bytes(&model), vectors)
    };
    let (m1, v1) = run();
    let (m2, v2) = run();
    let reloaded: Model = load_model(&m1).map_err(|e| e.to_string())?;
    let bits = |v: &DenseMatrix<f32>| v.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    ensure(
        m1 == m2 && bits(&v1) == bits(&v2) && model_to_bytes(&reloaded) == m1,
        format!("train, infer and save/load/save reproduce {} model bytes exactly", m1.len()),
    )
}

fn loss_decrease() -> Outcome {
    let data = sentiment_data();
    let mut rows = Vec::new();
    let mut ok = true;
    for (config, seed) in [(ModelConfig::pv_dm(32, 5), 11), (ModelConfig::pv_dbow(32, 5), 12)] {
        let mode = config.mode;
        let (_, report) = trained(&data, config, seed);
        let losses = report.mean_losses();
        let ratio = losses[49] / losses[0];
        ok &= ratio <= 0.5;
        rows.push(format!("{mode} {:.3} -> {:.3} (ratio {ratio:.3})", losses[0], losses[49]));
    }
    ensure(ok, format!("{} (bound 0.5)", rows.join(", ")))
}

fn classifier_oracles() -> Outcome {
    let mut rng = rng(10);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let class = i % 3;
        let centre = [(0.0, 4.0), (4.0, -2.0), (-4.0, -2.0)][class];
        rows.push(vec![centre.0 + rng.gen_range(-1.0..1.0), centre.1 + rng.gen_range(-1.0..1.0)]);
        labels.push(class);
    }
    let blobs = FeatureSet::new(DenseMatrix::<f32>::from_rows(&rows).unwrap(), labels).unwrap();
    let logreg = train_logreg(&blobs, &LogRegParams::default()).unwrap();
    let blob_acc = accuracy(&logreg, &blobs);

    let xor = FeatureSet::new(
        DenseMatrix::<f32>::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap(),
        vec![0, 1, 1, 0],
    )
    .unwrap();
    let mlp = train_mlp(
        &xor,
        &MlpParams {
            hidden: 50,
            epochs: 5000,
            ..MlpParams::default()
        },
    )
    .unwrap();
    let xor_err = evaluate(&mlp, &xor);
    ensure(
        blob_acc == 1.0 && xor_err == 0.0,
        format!("blob accuracy {:.1}%, XOR error {:.1}%", 100.0 * blob_acc, 100.0 * xor_err),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 10] = [
        ("gradient correctness", Some(Duration::from_secs(30)), gradient_correctness),
        ("normalization", Some(Duration::from_secs(10)), normalization),
        ("huffman properties", Some(Duration::from_secs(5)), huffman_properties),
        ("frozen inference", None, frozen_inference),
        ("end-to-end synthetic sentiment", Some(Duration::from_secs(120)), end_to_end_sentiment),
        ("triplet ordering", Some(Duration::from_secs(180)), triplet_ordering),
        ("concat vs average", None, concat_vs_average),
        ("determinism", None, determinism),
        ("loss decrease", None, loss_decrease),
        ("classifier oracles", None, classifier_oracles),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !only.is_empty() && !only.contains(&number) {
            continue;
        }
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = started.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(detail), Some(b)) if elapsed > *b => Err(format!("{detail}; took {elapsed:.1?}, budget {b:?}")),
            (o, _) => o,
        };
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {number:>2} {status} {name}: {detail} [{:.1}s]", elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
