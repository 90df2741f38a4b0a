//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 in {source_id} at byte {offset}")]
    Encoding { source_id: String, offset: usize },

    #[error("file not found: {path}")]
    MissingFile { path: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid labels manifest: {reason}")]
    Manifest { reason: String },

    #[error("invalid configuration: {reason}")]
    Config { reason: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("label {name:?} is not part of the corpus label set")]
    UnknownLabel { name: String },

    #[error("training requires at least two classes")]
    SingleClass,

    #[error("class {name:?} has no examples")]
    EmptyClass { name: String },

    #[error("class {name:?} has {count} examples, need at least {needed}")]
    ClassTooSmall {
        name: String,
        count: usize,
        needed: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} truths vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("focus class {name:?} is absent from the corpus")]
    FocusAbsent { name: String },

    #[error("confusion matrix has no observations")]
    EmptyConfusion,

    #[error("invalid certainty thresholds: low {low} must be < high {high}, both in (0, 1]")]
    ThresholdOrder { low: f64, high: f64 },

    #[error("reference shares do not match the report's party set: {reason}")]
    ShareMismatch { reason: String },

    #[error("model artifact error: {reason}")]
    Artifact { reason: String },

    #[error("split record not found: {path} (run `train` first)")]
    MissingSplitRecord { path: PathBuf },

    #[error("target document {path} contains no paragraphs after segmentation")]
    EmptyTarget { path: PathBuf },

    #[error("usage error: {reason}")]
    Usage { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an i/o error, turning NotFound into the dedicated variant.
    pub fn from_io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile { path }
        } else {
            Error::Io { path, source }
        }
    }
}
