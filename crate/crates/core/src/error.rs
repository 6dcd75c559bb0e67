use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("matrix is not positive definite (jitter reached {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },

    #[error("at least {required} points are required, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("coordinate out of range at row {row}, column {col}: {value}")]
    OutOfRange { row: usize, col: usize, value: f64 },

    #[error("design must have at least one row")]
    EmptyDesign,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("sobol direction numbers bundled for at most {max} dimensions, requested {requested}")]
    SobolDimension { requested: usize, max: usize },

    #[error("query point lies within {tol:e} of design row {row}")]
    PointInDesign { row: usize, tol: f64 },

    #[error("query coordinate {col} lies within {tol:e} of design row {row}")]
    CoordinateCollision { row: usize, col: usize, tol: f64 },

    #[error("predictor variance is numerically zero")]
    ZeroVariance,

    #[error("design carries no one-factor-at-a-time block metadata")]
    MissingBlocks,

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("test function `{0}` has no known global minimum")]
    MissingKnownMin(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (factorization, degenerate variance)
    /// as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } | Error::ZeroVariance => true,
            Error::AtIteration { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
