use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical fault: {what} became non-finite at t={time_ms} ms")]
    Numerical { what: String, time_ms: f64 },

    #[error("load error in {path}: {msg} (byte offset {offset})")]
    Load {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    #[error("insufficient images for class {class}: requested {requested}, available {available} (short by {})", requested - available)]
    InsufficientImages {
        class: u8,
        requested: usize,
        available: usize,
    },

    #[error("{0}")]
    Eval(String),

    #[error("config line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
