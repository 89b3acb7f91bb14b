use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {field}: expected {expected}, found {found}")]
    DimensionMismatch {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error(
        "matrix A is singular or ill-conditioned: reciprocal condition estimate {rcond:e} \
         is below the threshold {threshold:e}"
    )]
    SingularA { rcond: f64, threshold: f64 },

    #[error("delay m must be at least 1, got {0}")]
    BadDelay(i64),

    #[error("non-finite entry in {field}")]
    NonFiniteEntry { field: String },

    #[error("{0}")]
    Domain(String),

    #[error("negative sequence index {index} requested while evaluating a nested sum")]
    NegativeInnerIndex { index: i64 },

    #[error("nested sum has {tuples} index tuples, above the work budget of {budget}")]
    WorkBudgetExceeded { tuples: u128, budget: u128 },

    #[error("binomial coefficient C({n}, {k}) overflows 128-bit integers")]
    BinomialOverflow { n: u64, k: u64 },

    #[error("entries exceeded the double range at k = {k}")]
    Overflow { k: i64 },

    #[error("trajectory shapes differ: {0}")]
    ShapeMismatch(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
