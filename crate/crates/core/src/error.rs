use thiserror::Error;

/// Errors produced by the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("unknown experiment id `{0}` (valid ids: table2, fig3, table3, sigma0, fig4, fig5)")]
    UnknownExperiment(String),

    #[error("curves are not on a common time grid")]
    GridMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
