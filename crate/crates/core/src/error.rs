use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` has zero sample variance")]
    ZeroVariance(&'static str),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("columns have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },

    #[error("non-finite value at row {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("need more than k={k} points for the neighbor graph, got {n}")]
    TooFewPoints { n: usize, k: usize },

    #[error("top eigenvalue {0:e} is not positive")]
    DegenerateSpectrum(f64),

    #[error("embedding failed in bootstrap iteration {iteration}: {source}")]
    EmbeddingFailure {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
