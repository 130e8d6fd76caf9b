use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV input: {0}")]
    Csv(#[from] csv::Error),

    #[error("input has no header row")]
    MissingHeader,

    #[error("label column {0} not found in header")]
    LabelColumnNotFound(String),

    #[error("missing value at row {row}, column {column:?}")]
    MissingValue { row: usize, column: String },

    #[error("cannot parse {value:?} as a number at row {row}, column {column:?}")]
    UnparseableCell { row: usize, column: String, value: String },

    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("dataset needs at least 2 distinct labels, found {0}")]
    TooFewLabels(usize),

    #[error("dataset has no feature columns")]
    NoFeatures,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid sample weights: {0}")]
    InvalidWeights(&'static str),

    #[error("weights have length {weights}, dataset has {rows} rows")]
    WeightLength { weights: usize, rows: usize },

    #[error("cannot split {rows} rows into {folds} folds")]
    TooManyFolds { folds: usize, rows: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },

    #[error("Kalman gain {0} outside [0, 1]")]
    GainOutOfRange(f64),

    #[error("invalid score matrix: {0}")]
    InvalidScores(String),

    #[error("model has no components")]
    EmptyModel,

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("label {label} outside 0..{classes}")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("score table is missing a value for dataset {dataset:?}, algorithm {algorithm:?}")]
    MissingScore { dataset: String, algorithm: String },
}
