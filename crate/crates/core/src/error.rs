use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("graph is disconnected ({zero_eigenvalues} near-zero Laplacian eigenvalues)")]
    Disconnected { zero_eigenvalues: usize },

    #[error("epoch {epoch} (starting at iteration {start}) has a disconnected graph")]
    DisconnectedEpoch { epoch: usize, start: usize },

    #[error("could not generate a connected {kind} graph on {n} nodes after {attempts} attempts")]
    GenerationFailed {
        kind: String,
        n: usize,
        attempts: usize,
    },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("inner solver did not converge (residual {residual:e} after {iterations} iterations)")]
    SolverFailed { residual: f64, iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{name} = {value} lies outside the admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("unknown bound `{name}` (valid: {valid})")]
    UnknownBound { name: String, valid: String },

    #[error("bound `{bound}` requires the constant `{name}`")]
    MissingConstant { bound: String, name: String },

    #[error("the schedule's dual functions do not share a minimizer")]
    NoCommonMinimizer,

    #[error("potential is undefined for kappa = {kappa} (requires kappa > 1)")]
    PotentialUndefined { kappa: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
