use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("division by zero computing {ratio}")]
    DivisionByZero { ratio: &'static str },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("model file field `{field}`: {message}")]
    ModelFormat { field: &'static str, message: String },

    #[error("no trained model supplied for {0}")]
    MissingModel(crate::gas_model::Method),

    #[error("trend report: {0}")]
    Trend(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
