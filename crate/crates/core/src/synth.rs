//! Synthetic topic corpora for desk-scale experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthParams {
    pub topics: usize,
    pub docs_per_topic: usize,
    /// Size of each topic's private word pool.
    pub vocab_per_topic: usize,
    /// Size of the pool shared by all topics.
    pub shared_vocab: usize,
    pub doc_len: usize,
    /// Probability that a token comes from the shared pool.
    pub noise: f64,
    /// Every document draws its topic words from its own random subset of
    /// this many words of the topic pool. 0 means the whole pool.
    pub focus: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            topics: 2,
            docs_per_topic: 50,
            vocab_per_topic: 20,
            shared_vocab: 20,
            doc_len: 20,
            noise: 0.2,
            focus: 0,
            seed: 1,
        }
    }
}

/// Generated documents (in shuffled order) and the topic of each.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub docs: Vec<Vec<String>>,
    pub topics: Vec<usize>,
}

pub fn topic_word(topic: usize, i: usize) -> String {
    format!("t{topic}w{i}")
}

pub fn shared_word(i: usize) -> String {
    format!("s{i}")
}

pub fn synth_corpus(params: &SynthParams) -> Result<SynthCorpus> {
    if !(0.0..=1.0).contains(&params.noise) {
        return Err(Error::InvalidInput("noise must lie in [0, 1]".into()));
    }
    if params.topics == 0 || params.vocab_per_topic == 0 {
        return Err(Error::InvalidInput("need at least one topic and one word per topic".into()));
    }
    if params.focus > params.vocab_per_topic {
        return Err(Error::InvalidInput("focus exceeds the topic pool".into()));
    }
    if params.noise > 0.0 && params.shared_vocab == 0 {
        return Err(Error::InvalidInput("noise needs a shared pool".into()));
    }
    if params.noise < 1.0 && params.vocab_per_topic == 0 {
        return Err(Error::InvalidInput("empty topic pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let focus = if params.focus == 0 { params.vocab_per_topic } else { params.focus };
    let pool: Vec<usize> = (0..params.vocab_per_topic).collect();
    let mut labelled = Vec::with_capacity(params.topics * params.docs_per_topic);
    for topic in 0..params.topics {
        for _ in 0..params.docs_per_topic {
            let words: Vec<usize> = pool.choose_multiple(&mut rng, focus).copied().collect();
            let doc = (0..params.doc_len)
                .map(|_| {
                    if rng.gen_bool(params.noise) {
                        shared_word(rng.gen_range(0..params.shared_vocab))
                    } else {
                        topic_word(topic, words[rng.gen_range(0..focus)])
                    }
                })
                .collect();
            labelled.push((doc, topic));
        }
    }
    labelled.shuffle(&mut rng);
    let (docs, topics) = labelled.into_iter().unzip();
    Ok(SynthCorpus { docs, topics })
}
