use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input value {0}")]
    NonFiniteInput(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("sample {index} failed: {source}")]
    Sample { index: usize, source: Box<Error> },
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("fitted slope {slope} is not significantly nonzero (standard error {std_error})")]
    InsignificantSlope { slope: f64, std_error: f64 },
    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
