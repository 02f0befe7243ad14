mod common;

use paravec::persist::{load_model, model_to_bytes, read_header, read_vectors, write_vectors};
use paravec::query::{nearest, Query, Space};
use paravec::synth::{synth_corpus, SynthParams};
use paravec::train::{train, TrainSchedule};
use paravec::{Corpus, HuffmanCoding, Model, Model64, ModelConfig, Vocabulary};
use paravec::matrix::DenseMatrix;
use rand::Rng;

#[test]
fn every_configuration_roundtrips_byte_exact() {
    let mut rng = common::rng(1);
    for (mode, composition) in common::MODES {
        for layer in common::LAYERS {
            for symmetric in [false, true] {
                let mut m = common::random_model(&mut rng, mode, composition, layer, 0.5);
                let mut config = m.config().clone();
                config.symmetric = symmetric;
                m = Model64::new(config, m.vocab().clone(), 3, rng.gen()).unwrap();
                let bytes = model_to_bytes(&m);
                let loaded: Model = load_model(&bytes).unwrap();
                assert_eq!(model_to_bytes(&loaded), bytes);
                assert_eq!(loaded.config(), m.config());
                assert_eq!(loaded.vocab(), m.vocab());
                assert_eq!(loaded.n_paragraphs(), 3);
                assert_eq!(loaded.huffman(), &HuffmanCoding::build(m.vocab()));
                let (header, _) = read_header(&bytes).unwrap();
                assert_eq!(&header.config, m.config());
                for r in 0..m.words().rows() {
                    let (a, b) = (m.words().row(r), loaded.words().row(r));
                    assert!(a.iter().zip(&b).all(|(x, y)| (*x as f32) == *y));
                }
            }
        }
    }
}

#[test]
fn vector_file_header_matches_payload() {
    let mut rng = common::rng(2);
    for (rows, cols) in [(0, 3), (1, 1), (7, 5)] {
        let data: Vec<f32> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let m = DenseMatrix::from_vec(rows, cols, data).unwrap();
        let mut buf = Vec::new();
        write_vectors(&m, &mut buf).unwrap();
        let header = format!("paravec-vec v1 {rows} {cols}\n");
        assert!(buf.starts_with(header.as_bytes()));
        assert_eq!(buf.len(), header.len() + 4 * rows * cols);
        assert_eq!(read_vectors(&buf).unwrap(), m);
        assert!(read_vectors(&buf[..buf.len().saturating_sub(1)]).is_err() || rows * cols == 0);
    }
}

fn topic_model() -> (Model, Vec<usize>) {
    let params = SynthParams {
        topics: 4,
        docs_per_topic: 50,
        vocab_per_topic: 30,
        shared_vocab: 20,
        doc_len: 30,
        noise: 0.3,
        focus: 0,
        seed: 9,
    };
    let c = synth_corpus(&params).unwrap();
    let vocab = Vocabulary::build(&c.docs, 1).unwrap();
    let corpus = Corpus::encode(&c.docs, &vocab);
    let model = Model::new(ModelConfig::pv_dbow(16, 4), vocab, corpus.len(), 3).unwrap();
    let schedule = TrainSchedule { epochs: 30, lr_start: common::LR, seed: 3, ..TrainSchedule::default() };
    train(&model, &corpus, &schedule).unwrap();
    (model, c.topics)
}

#[test]
fn neighbours_share_topics_and_survive_reload() {
    let (model, topics) = topic_model();
    let reloaded: Model = load_model(&model_to_bytes(&model)).unwrap();
    let (mut same, mut total) = (0, 0);
    for p in 0..model.n_paragraphs() {
        let found = nearest(&model, &Query::Paragraph(p), 5, Space::Paragraphs).unwrap();
        assert_eq!(found.len(), 5);
        assert!(found.iter().all(|n| n.id != p));
        assert!(found.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        assert_eq!(found, nearest(&reloaded, &Query::Paragraph(p), 5, Space::Paragraphs).unwrap());
        same += found.iter().filter(|n| topics[n.id] == topics[p]).count();
        total += found.len();
    }
    let purity = same as f64 / total as f64;
    assert!(purity >= 0.8, "purity {purity}");
}

#[test]
fn word_neighbours_are_sorted_and_skip_null() {
    let (model, _) = topic_model();
    let word = model.vocab().surface(1).to_owned();
    let k = model.vocab().len();
    let found = nearest(&model, &Query::Word(&word), k, Space::Words).unwrap();
    assert_eq!(found.len(), model.vocab().len() - 2);
    assert!(found.iter().all(|n| n.id != 0 && n.id != 1));
    assert!(found
        .windows(2)
        .all(|w| w[0].similarity > w[1].similarity || (w[0].similarity == w[1].similarity && w[0].id < w[1].id)));
}
