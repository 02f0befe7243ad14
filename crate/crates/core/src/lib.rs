//! Paragraph vectors: unsupervised fixed-length representations of texts,
//! learned with PV-DM (distributed memory) and PV-DBOW (distributed bag of
//! words) over a hierarchical or full softmax.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the crate
//! root exports `f32` aliases for everyday use and `f64` aliases for
//! gradient checking.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod infer;
pub mod matrix;
pub mod model;
pub mod persist;
pub mod query;
pub mod retrieval;
pub mod scalar;
pub mod synth;
pub mod train;

pub use corpus::{tokenize, Corpus, HuffmanCoding, Tokenizer, Vocabulary};
pub use error::{Error, Result};
pub use model::{Composition, ContextWindow, Gradients, Mode, ModelConfig, OutputLayer, PvModel};
pub use scalar::Scalar;

/// Model with 32-bit parameter storage.
pub type Model = PvModel<f32>;
/// Model with 64-bit parameter storage, for finite-difference checks.
pub type Model64 = PvModel<f64>;
/// Feature table with 32-bit entries.
pub type Features = classify::FeatureSet<f32>;
/// Dense vectors with 32-bit entries.
pub type Vectors = matrix::DenseMatrix<f32>;
