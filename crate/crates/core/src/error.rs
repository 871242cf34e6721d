use thiserror::Error;

/// Errors produced by the dependency-analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not column-stochastic: column {column} sums to {sum}")]
    NotColumnStochastic { column: usize, sum: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("divergence detected: {0}")]
    DivergenceDetected(String),

    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },

    #[error("schema error: {0}")]
    SchemaError(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a bad run configuration rather than by the data.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::SchemaError(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
