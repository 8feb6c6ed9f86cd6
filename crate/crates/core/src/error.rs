use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("functions are sampled on different grids")]
    GridMismatch,

    #[error("reference function has zero norm")]
    ZeroNorm,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate search direction: curvature {curvature:e}, slope {slope:e}")]
    DegenerateDirection { curvature: f64, slope: f64 },

    #[error("objective is not finite at step length {alpha:e}")]
    NonFiniteObjective { alpha: f64 },

    #[error("unknown experiment {name:?}; valid names: {valid}")]
    UnknownExperiment { name: String, valid: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
