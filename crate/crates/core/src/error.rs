use thiserror::Error;

/// Errors raised by measurement, statistics and tuning routines.
#[derive(Debug, Error)]
pub enum MprError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid record: {0}")]
    Record(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("schema mismatch between sample sets")]
    SchemaMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computational guard refused the request (enumeration too large).
    #[error("guard exceeded: {0}")]
    Guard(String),
}

impl MprError {
    pub fn is_guard(&self) -> bool {
        matches!(self, MprError::Guard(_))
    }
}

impl From<serde_json::Error> for MprError {
    fn from(err: serde_json::Error) -> Self {
        MprError::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MprError>;
