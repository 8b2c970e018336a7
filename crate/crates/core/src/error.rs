use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the lithology pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feature `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("feature mismatch: model expects {expected:?}, data has {found:?}")]
    FeatureMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("training requires both classes, only {0} present")]
    SingleClass(i8),

    #[error(
        "SMO did not converge after {iterations} iterations \
         (best gap {best_gap:.3e}, tolerance {tolerance:.1e})"
    )]
    NotConverged {
        iterations: usize,
        best_gap: f64,
        tolerance: f64,
    },

    #[error("class {class}: {source}")]
    ClassTraining {
        class: String,
        #[source]
        source: Box<Error>,
    },

    #[error("sigma {sigma}: {source}")]
    SweepPoint {
        sigma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Degenerate(String),

    #[error("model file: {0}")]
    Model(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
