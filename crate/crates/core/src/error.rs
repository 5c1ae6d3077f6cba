use std::path::PathBuf;

use thiserror::Error;

use crate::oracle::ModeKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed feedback: {0}")]
    Feedback(String),

    #[error("guard conflict in mode {mode}: transitions to {first} and {second} both enabled")]
    GuardConflict {
        mode: ModeKind,
        first: ModeKind,
        second: ModeKind,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite action {0:?}")]
    NonFiniteAction([f64; 3]),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("non-finite loss in epoch {epoch}, minibatch {minibatch}")]
    NonFiniteLoss { epoch: usize, minibatch: usize },

    #[error("update aborted at iteration {iteration}: {source}")]
    UpdateAborted {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },

    #[error("{path}:{line}: {msg}")]
    Trace {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
