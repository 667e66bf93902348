use thiserror::Error;

pub type Result<T> = std::result::Result<T, WalkError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("index out of bounds: {what} = {index} (limit {limit})")]
    IndexOutOfBounds {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("incompatible topology: {0}")]
    IncompatibleTopology(String),

    #[error("invalid coin: {0}")]
    InvalidCoin(String),

    #[error("invalid marked set: {0}")]
    InvalidMarkedSet(String),

    #[error("dense materialization refused: dimension {dim} exceeds {limit}")]
    DenseTooLarge { dim: usize, limit: usize },

    #[error("degenerate double diagonal: {0} and {1} coincide modulo {2}")]
    DegenerateDoubleDiagonal(i64, i64, usize),

    #[error("missing snapshots: {0}")]
    MissingSnapshots(String),

    #[error("formula valid only for t < N (t = {t}, N = {n})")]
    FormulaRange { t: usize, n: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
