use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the toolkit.
#[derive(Debug, Error)]
pub enum CfError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset contains no ratings")]
    EmptyDataset,

    #[error("model has no test users; use a test-user fraction > 0")]
    EmptyTestSet,

    #[error("{kind} index {index} out of range (0..{len})")]
    OutOfBounds {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    /// A pipeline stage ran before the stage that produces its input.
    #[error("store entry `{required}` missing; run {producer} first")]
    MissingStep {
        required: &'static str,
        producer: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training diverged at epoch {epoch} (learning rate {learning_rate})")]
    Diverged { epoch: usize, learning_rate: f64 },

    /// A per-element action failed; the pass was aborted.
    #[error("pass aborted at element {index}: {source}")]
    ElementFailed {
        index: usize,
        #[source]
        source: Box<CfError>,
    },

    #[error("worker pool: {0}")]
    WorkerPool(String),

    #[error("unknown grid key `{key}` ({axis})")]
    UnknownGridKey { key: String, axis: &'static str },
}

pub type Result<T> = std::result::Result<T, CfError>;
