//! Shared error type for the whole toolkit.

use thiserror::Error;

/// Errors produced by any stage of the surrogate pipeline.
#[derive(Debug, Error)]
pub enum RomError {
    /// A design point, normalized coordinate, or user input violates its bounds.
    #[error("validation error: {0}")]
    Validation(String),

    /// A configuration is internally inconsistent or out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data is malformed, mismatched, or non-finite.
    #[error("data error: {0}")]
    Data(String),

    /// A numerical procedure failed (rank deficiency, Cholesky breakdown, divergence).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A resource limit was exceeded (e.g. basis size cap).
    #[error("resource error: {0}")]
    Resource(String),

    /// A requested relative metric is undefined (e.g. zero denominator).
    #[error("metric error: {0}")]
    Metric(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl RomError {
    /// Process exit code for the CLI: 2 usage, 3 data, 4 numerical, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RomError::Validation(_) | RomError::Config(_) | RomError::Resource(_) => 2,
            RomError::Data(_) | RomError::Metric(_) => 3,
            RomError::Numerical(_) => 4,
            RomError::Io(_) | RomError::Serde(_) => 5,
        }
    }

    /// Short machine-readable kind tag used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            RomError::Validation(_) => "validation",
            RomError::Config(_) => "config",
            RomError::Data(_) => "data",
            RomError::Numerical(_) => "numerical",
            RomError::Resource(_) => "resource",
            RomError::Metric(_) => "metric",
            RomError::Io(_) => "io",
            RomError::Serde(_) => "serde",
        }
    }
}

pub type Result<T> = std::result::Result<T, RomError>;
