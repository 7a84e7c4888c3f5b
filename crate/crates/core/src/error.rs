use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("point {index} has degenerate projective depth s = {depth:e}")]
    DegenerateDepth { index: usize, depth: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("empty primitive list")]
    EmptyScene,

    #[error("need at least {required} correspondences, got {found}")]
    InsufficientFeatures { required: usize, found: usize },

    #[error("solver stalled after {iterations} iterations: damped normal matrix singular at lambda = {lambda:e}")]
    SolverStall { iterations: usize, lambda: f64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
