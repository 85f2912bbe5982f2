use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unit-norm violation at column {column} (norm {norm})")]
    NotUnitNorm { column: usize, norm: f64 },

    #[error("index {index} out of range for {count} entries")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("duplicate index {0} in subset")]
    DuplicateIndex(usize),

    #[error("empty subset")]
    EmptySubset,

    #[error("duplicate prototype index {0}")]
    NotAPermutation(usize),

    #[error("degenerate momentum update for class {0}: representative cancelled to zero")]
    DegenerateUpdate(usize),

    #[error("class {0} has no representative yet")]
    UnseenClass(usize),

    #[error("non-finite cost entry at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },

    #[error("degenerate feature: pre-normalization output is zero")]
    DegenerateFeature,

    #[error("malformed probability row {0}")]
    MalformedProbabilities(usize),

    #[error("class count mismatch: dataset has {dataset}, prototypes have {prototypes}")]
    ClassCountMismatch { dataset: usize, prototypes: usize },

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("could not place {count} class means {min_angle} rad apart after {attempts} attempts")]
    RejectionFailure { count: usize, min_angle: f64, attempts: usize },

    #[error("class {class} has {available} samples, {required} required")]
    InsufficientSamples { class: usize, available: usize, required: usize },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}:{line}: width mismatch, expected {expected} values, found {found}")]
    WidthMismatch { path: PathBuf, line: usize, expected: usize, found: usize },

    #[error("{path}:{line}: label {label} out of range for {count} classes")]
    LabelOutOfRange { path: PathBuf, line: usize, label: usize, count: usize },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
