//! Per-language CBOW word embeddings and nearest-word queries.

mod cbow;
mod embeddings;
mod vocab;

pub use cbow::{
    cbow_step, negative_sampling_gradients, train_cbow, AtomicParam, CbowConfig, CbowTrainer, EpochStats,
    NoiseDistribution, NsGradients, Scratch, SharedParam, TrainingLog,
};
pub use embeddings::WordEmbeddings;
pub use vocab::{build_vocab, Vocabulary};

/// Cosine similarity of two vectors; errors on a zero vector.
pub use crate::linalg::cosine;
