use std::path::PathBuf;

use thiserror::Error;

/// Which side of a comparison a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Reference,
    Prediction,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Reference => f.write_str("reference"),
            Side::Prediction => f.write_str("prediction"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("data size mismatch: expected {expected} bytes, found {actual}")]
    DataSizeMismatch { expected: usize, actual: usize },
    #[error("unsupported datatype: {0}")]
    UnsupportedDatatype(String),
    #[error("voxel value {0} is not an integer label")]
    NonIntegerLabels(f64),
    #[error("voxel value {0} is not a valid non-negative label")]
    InvalidLabel(f64),
    #[error("invalid spacing {0:?}: every component must be positive and finite")]
    InvalidSpacing([f64; 3]),
    #[error("invalid dimensions {0:?}")]
    InvalidDims([usize; 3]),
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimsMismatch([usize; 3], [usize; 3]),
    #[error("spacing mismatch: {0:?} vs {1:?}")]
    SpacingMismatch([f64; 3], [f64; 3]),
    #[error("{0} surface is empty")]
    EmptySurface(Side),
    #[error("ground truth and prediction must both be files or both be directories")]
    MixedMode,
    #[error("no matching filenames between {0} and {1}")]
    NoMatches(PathBuf, PathBuf),
    #[error("unknown metric: {0}")]
    UnknownMetric(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("existing CSV header {found:?} does not match {expected:?}")]
    SchemaMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("failed to evaluate {gdth} vs {pred}: {source}")]
    Pair {
        gdth: String,
        pred: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
