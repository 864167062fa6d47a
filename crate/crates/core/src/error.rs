use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("series centers differ")]
    CenterMismatch,

    #[error("singular pivot: {0}")]
    SingularPivot(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation order exhausted while computing the valuation of equation {equation}")]
    TruncationExhausted { equation: usize },

    #[error("rank deficiency: {0}")]
    RankDeficiency(String),

    #[error("cannot extract a square system of rank {n}: only {found} independent rows")]
    Extraction { n: usize, found: usize },

    #[error("deflation did not terminate after {0} rounds")]
    NonTermination(usize),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("certificate unavailable: {0}")]
    CertificateUnavailable(String),

    #[error("invalid `{field}`: {message}")]
    Parse { field: String, message: String },
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
