use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm vector")]
    ZeroVector,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("token `{0}` is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("place tokens missing from the vocabulary: {}", .0.join(", "))]
    MissingPlaces(Vec<String>),

    #[error("gazetteer: {0}")]
    Gazetteer(String),

    #[error("unknown place `{0}`")]
    UnknownPlace(String),

    #[error("missing {what} for ids: {}", .ids.join(", "))]
    MissingIds { what: &'static str, ids: Vec<String> },

    #[error("index space mismatch: {0}")]
    SpaceMismatch(&'static str),

    #[error("caption has no in-vocabulary token")]
    NoKnownTokens,
}
