use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("singular innovation covariance (condition estimate {condition:.3e})")]
    SingularInnovation { condition: f64 },

    #[error("no feasible assignment exists for the cost matrix")]
    Infeasible,

    #[error("exhaustive enumeration limited to {max_rows} rows x {max_cols} columns, got {rows}x{cols}")]
    EnumerationTooLarge {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },

    #[error("hypothesis pool empty after truncation (filter divergence)")]
    FilterDivergence,

    #[error("removing the label would empty the hypothesis pool")]
    PoolExhausted,

    #[error("no hypothesis with cardinality {0}")]
    NoHypothesisOfCardinality(usize),

    #[error("zero-area box")]
    ZeroArea,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("frame {frame}: {source}")]
    AtFrame {
        frame: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_frame(frame: u32, source: Error) -> Self {
        Error::AtFrame {
            frame,
            source: Box::new(source),
        }
    }
}
