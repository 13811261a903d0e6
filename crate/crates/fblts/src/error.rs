//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh too small: {0}")]
    MeshSize(String),

    #[error("mesh field `{field}` invalid at index {index}: {message}")]
    MeshField {
        field: String,
        index: usize,
        message: String,
    },

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("non-positive thickness at cell {cell} (h = {value:.6e}) during {context}")]
    NonPositiveThickness {
        cell: usize,
        value: f64,
        context: String,
    },

    #[error("label error: {0}")]
    Labels(String),

    #[error("subcycle index {k} out of range for M = {m}: {message}")]
    SubcycleIndex { k: usize, m: usize, message: String },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("nonpositive input: {0}")]
    NonPositiveInput(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
