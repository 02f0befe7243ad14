use std::io;

use thiserror::Error;

/// Errors produced by the paravec library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no token reached the minimum count of {min_count}")]
    AllTokensPruned { min_count: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("update produced a non-finite parameter")]
    NonFiniteUpdate,

    #[error("document is empty after dropping out-of-vocabulary tokens")]
    EmptyAfterOov,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("metric learning diverged (non-finite loss); reduce the learning rate")]
    Degenerate,

    #[error("triplets need at least two topics to draw negatives from")]
    NoNegativePool,

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("corrupt model file at byte {offset}: {reason}")]
    CorruptModel { offset: u64, reason: String },

    #[error("unsupported model file version `{found}`")]
    VersionMismatch { found: String },

    #[error("corrupt vector file: {0}")]
    CorruptVectors(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
