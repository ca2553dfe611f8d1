use thiserror::Error;

/// Errors produced by the numerical kernels and the problem-specific modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid rank: {0}")]
    InvalidRank(String),

    #[error("invalid rank policy: {0}")]
    InvalidPolicy(String),

    /// Every singular value was rejected by the rank policy.
    #[error("rank-zero matrix: no singular value accepted by the rank policy")]
    RankZero,

    /// The `dF/dy` block has rank zero, so the least-squares solution map is trivial.
    #[error("degenerate system: dF/dy has rank zero under its policy")]
    DegenerateSystem,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// ST-HOSVD produced a core without full multilinear rank.
    #[error("degenerate truncation: {0}")]
    DegenerateTruncation(String),

    /// The closed-form Tucker condition number requires `k_i < n_i` for some mode.
    #[error("outside hypothesis: every mode has k_i = n_i")]
    OutOfHypothesis,

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
