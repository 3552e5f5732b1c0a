use thiserror::Error;

pub type Result<T> = std::result::Result<T, AbsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbsError {
    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    Dimension {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for {op} (bound {bound})")]
    Index {
        op: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("degenerate Abaffian update at row {row}: |w^T H a| = {value:e}")]
    DegenerateUpdate { row: usize, value: f64 },

    #[error("degenerate step: a^T p = 0")]
    DegenerateStep,

    #[error("invalid tolerances ep1={ep1}, ep2={ep2}: both must be finite and nonnegative")]
    InvalidTolerance { ep1: f64, ep2: f64 },

    #[error("invalid state: {0}")]
    State(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl AbsError {
    pub(crate) fn dim(op: &'static str, expected: usize, actual: usize) -> Self {
        AbsError::Dimension {
            op,
            expected,
            actual,
        }
    }
}

impl From<std::io::Error> for AbsError {
    fn from(e: std::io::Error) -> Self {
        AbsError::Io(e.to_string())
    }
}
