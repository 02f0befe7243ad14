use std::time::Instant;

use paravec::infer::{document_seed, infer_batch, infer_traced, infer_vector, InferenceSchedule};
use paravec::persist::model_to_bytes;
use paravec::scalar::cosine;
use paravec::synth::{synth_corpus, SynthParams};
use paravec::train::{train, TrainSchedule};
use paravec::{Corpus, Error, Model, ModelConfig, OutputLayer, Vocabulary};

fn trained(config: ModelConfig) -> (Model, Vec<Vec<String>>) {
    let synth = synth_corpus(&SynthParams {
        docs_per_topic: 20,
        focus: 4,
        ..SynthParams::default()
    })
    .unwrap();
    let vocab = Vocabulary::build(&synth.docs, 1).unwrap();
    let corpus = Corpus::encode(&synth.docs, &vocab);
    let model = Model::new(config, vocab, corpus.len(), 3).unwrap();
    let schedule = TrainSchedule { epochs: 30, lr_start: 0.05, seed: 3, ..TrainSchedule::default() };
    train(&model, &corpus, &schedule).unwrap();
    (model, synth.docs)
}

#[test]
fn inference_never_touches_the_model() {
    for output_layer in [OutputLayer::Hierarchical, OutputLayer::Full] {
        for base in [ModelConfig::pv_dm(8, 4), ModelConfig::pv_dbow(8, 4)] {
            let (model, docs) = trained(ModelConfig { output_layer, ..base });
            let before = model_to_bytes(&model);
            infer_batch(&model, &docs, &InferenceSchedule::default(), 3);
            infer_vector(&model, &docs[0], &InferenceSchedule::default()).unwrap();
            assert_eq!(model_to_bytes(&model), before);
        }
    }
}

#[test]
fn training_documents_are_recognised() {
    for config in [ModelConfig::pv_dm(16, 4), ModelConfig::pv_dbow(16, 4)] {
        let (model, docs) = trained(config);
        let n = docs.len();
        let schedule = InferenceSchedule { lr_start: 0.05, ..InferenceSchedule::default() };
        let mut recognised = 0;
        for (i, doc) in docs.iter().enumerate() {
            let v = infer_vector(&model, doc, &schedule).unwrap();
            let sims: Vec<f64> = (0..n).map(|j| cosine(&v, &model.paragraphs().row(j))).collect();
            let beaten = sims.iter().enumerate().filter(|&(j, &s)| j != i && s < sims[i]).count();
            if beaten as f64 >= 0.9 * (n - 1) as f64 {
                recognised += 1;
            }
        }
        assert!(recognised as f64 >= 0.9 * n as f64, "{recognised} of {n}");
    }
}

#[test]
fn inference_loss_does_not_increase() {
    let (model, docs) = trained(ModelConfig::pv_dm(8, 4));
    let mut ok = 0;
    for (i, doc) in docs.iter().enumerate() {
        let schedule = InferenceSchedule { seed: i as u64, lr_start: 0.05, ..InferenceSchedule::default() };
        let losses = infer_traced(&model, doc, &schedule).unwrap().pass_losses;
        if losses.last().unwrap() <= losses.first().unwrap() {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.95 * docs.len() as f64);
}

#[test]
fn zero_steps_return_the_initialisation() {
    let (model, docs) = trained(ModelConfig::pv_dbow(8, 4));
    let schedule = InferenceSchedule { steps: 0, seed: 5, ..InferenceSchedule::default() };
    let v = infer_vector(&model, &docs[0], &schedule).unwrap();
    let again = infer_vector(&model, &docs[1], &schedule).unwrap();
    assert_eq!(v, again);
    assert!(v.iter().all(|x| x.abs() <= 0.5 / 8.0));
}

#[test]
fn empty_documents() {
    let (model, _) = trained(ModelConfig::pv_dm(8, 4));
    let oov = vec!["never-seen".to_owned()];
    assert!(matches!(
        infer_vector(&model, &oov, &InferenceSchedule::default()),
        Err(Error::EmptyAfterOov)
    ));
    let zero = InferenceSchedule { zero_on_empty: true, ..InferenceSchedule::default() };
    assert_eq!(infer_vector(&model, &oov, &zero).unwrap(), vec![0.0; 8]);
    let batch = infer_batch(&model, &[oov.clone(), vec!["t0w0".into()]], &InferenceSchedule::default(), 1);
    assert_eq!(batch.failures.len(), 1);
    assert_eq!(batch.failures[0].0, 0);
}

#[test]
fn batch_rows_match_single_inference_for_any_worker_count() {
    let (model, docs) = trained(ModelConfig::pv_dm(8, 4));
    let schedule = InferenceSchedule { seed: 12, ..InferenceSchedule::default() };
    let one = infer_batch(&model, &docs, &schedule, 1).vectors;
    let four = infer_batch(&model, &docs, &schedule, 4).vectors;
    assert_eq!(one, four);
    for i in [0, 7, docs.len() - 1] {
        let single = InferenceSchedule { seed: document_seed(12, i), ..schedule.clone() };
        assert_eq!(one.row(i), &infer_vector(&model, &docs[i], &single).unwrap()[..]);
    }
    let twins = infer_vector(&model, &docs[0], &schedule).unwrap();
    assert_eq!(twins, infer_vector(&model, &docs[0], &schedule).unwrap());
}

#[test]
fn parallel_inference_throughput() {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cores < 4 {
        eprintln!("skipping throughput check: {cores} core(s) available");
        return;
    }
    let (model, _) = trained(ModelConfig::pv_dm(16, 4));
    let docs = synth_corpus(&SynthParams { docs_per_topic: 500, ..SynthParams::default() }).unwrap().docs;
    let schedule = InferenceSchedule { steps: 20, ..InferenceSchedule::default() };
    let t = Instant::now();
    infer_batch(&model, &docs, &schedule, 1);
    let serial = t.elapsed();
    let t = Instant::now();
    infer_batch(&model, &docs, &schedule, 4);
    let parallel = t.elapsed();
    assert!(serial >= 2 * parallel, "serial {serial:?} parallel {parallel:?}");
}
