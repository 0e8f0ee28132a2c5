use thiserror::Error;

/// Errors raised by the laboratory. Search-style operations that can fail to
/// find a witness report `SearchExhausted`, which is never a refutation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("precision error: requested depth {requested} is below the clopen depth {available}")]
    Precision { requested: usize, available: usize },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("group closure exceeds the element cap of {cap}")]
    ClosureCapExceeded { cap: usize },

    #[error("group is not transitive on its {degree} points")]
    NotTransitive { degree: usize },

    #[error("no decomposition as a power of a simple group: {0}")]
    DecompositionNotFound(String),

    #[error("generators do not move the base vertex across the radius-{radius} ball within word length {bound}")]
    NotTransitiveAtRadius { radius: usize, bound: usize },

    #[error("element is not skewering on the given clopen: {0}")]
    NotSkewering(String),

    #[error("translates are not pairwise disjoint: {0}")]
    DisjointnessFailure(String),

    #[error("search exhausted within word bound {bound}: {what}")]
    SearchExhausted { what: String, bound: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl LabError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        LabError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        LabError::Invalid(message.into())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
