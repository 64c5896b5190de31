use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the validity domain of a physical model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A schedule, spec or analysis option violates its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// Series that must be aligned have different lengths.
    #[error("shape mismatch: {what} ({left} vs {right})")]
    Shape {
        what: &'static str,
        left: usize,
        right: usize,
    },

    /// The detected population lies outside the fringe; lock is lost.
    #[error("fringe saturation: cos(phase) argument {argument} outside [-1, 1]")]
    Saturation { argument: f64 },

    #[error("rank-deficient design: channel `{channel}` is collinear with {}", .with.join(", "))]
    RankDeficient { channel: String, with: Vec<String> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
