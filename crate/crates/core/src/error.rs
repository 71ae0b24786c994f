//! Error type shared by every module in the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All the ways loading, validating, fitting, or reporting can fail.
#[derive(Debug, Error)]
pub enum Error {
    /// A nonempty sequence was required.
    #[error("empty input")]
    EmptyInput,

    /// Two shapes that must agree do not; the message names both.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scalar argument or configuration field violates its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A CSV cell failed to parse. Rows and columns are 1-based file
    /// coordinates (the header line, when present, counts as line 1).
    #[error("{}: parse error at row {row}, column {col}: {message}", file.display())]
    Parse {
        file: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },

    /// A CSV cell parsed but is NaN or infinite.
    #[error("{}: non-finite value at row {row}, column {col}", file.display())]
    NonFinite {
        file: PathBuf,
        row: usize,
        col: usize,
    },

    /// A label lies outside `[0, classes)`. The row is a 1-based file
    /// coordinate, like [`Error::Parse`].
    #[error("label out of range at row {row}: {label} (classes: {classes})")]
    LabelOutOfRange {
        row: usize,
        label: i64,
        classes: usize,
    },

    /// Files that must describe the same samples have different row counts.
    #[error("row count mismatch: {0}")]
    RowCountMismatch(String),

    /// Two datasets (or a dataset and its class-name list) disagree on the
    /// number of classes.
    #[error("class count mismatch: {0}")]
    ClassCountMismatch(String),

    /// Two datasets disagree on the feature dimension, or only one of them
    /// carries features.
    #[error("feature dimension mismatch: {0}")]
    FeatureDimMismatch(String),

    /// An operation that conditions on input features was given a dataset
    /// without them.
    #[error("features required: {0}")]
    FeaturesRequired(String),

    /// A model file declares a `kind` this crate does not know.
    #[error("unknown model kind {0:?}")]
    UnknownModelKind(String),

    /// A model file has the right kind but inconsistent or invalid contents.
    #[error("invalid model file: {0}")]
    ModelFile(String),

    #[error("{}: invalid JSON: {message}", file.display())]
    Json { file: PathBuf, message: String },

    /// The training loss became NaN or infinite; surfaced as its own variant
    /// so callers can distinguish numeric failure from bad input.
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// A probability row does not sum to one. The row index is zero-based
    /// (it refers to an in-memory matrix, not a file).
    #[error("probabilities in row {row} sum to {sum} (expected 1 within 1e-9)")]
    RowNotNormalized { row: usize, sum: f64 },

    /// A confidence value lies outside `[0, 1]`.
    #[error("confidence out of range at index {index}: {value}")]
    ConfidenceOutOfRange { index: usize, value: f64 },
}
