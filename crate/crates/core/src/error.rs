use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("scenario schema error: {0}")]
    Schema(String),

    #[error("invalid model parameters: {0}")]
    Domain(String),

    #[error("grid needs at least 4 nodes, got {0}")]
    GridSize(usize),

    #[error("stationary system is singular (residual {residual:e})")]
    Singular { residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no stationary solution: {0}")]
    NoSolution(String),

    #[error("linear solve failed: residual {residual:e} exceeds {limit:e}")]
    SolverFailure { residual: f64, limit: f64 },

    #[error("crossing not bracketed: {0}")]
    Bracket(String),

    #[error("no node within the rupture tolerance (min eta = {min_eta:e})")]
    EmptyRuptureSet { min_eta: f64 },

    #[error("rupture events at t = {previous} and t = {current} are closer than one time step")]
    Stagnation { previous: f64, current: f64 },

    #[error("rupture left the distinguished interval {expected}: reset intervals {found:?} at t = {time}")]
    ModelViolation {
        expected: usize,
        found: Vec<usize>,
        time: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    ModelViolation,
    Config,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ModelViolation { .. } => ErrorKind::ModelViolation,
            Error::Parse(_)
            | Error::Schema(_)
            | Error::Domain(_)
            | Error::GridSize(_)
            | Error::Unsupported(_)
            | Error::NoSolution(_)
            | Error::Io { .. } => ErrorKind::Config,
            Error::Singular { .. }
            | Error::SolverFailure { .. }
            | Error::Bracket(_)
            | Error::EmptyRuptureSet { .. }
            | Error::Stagnation { .. } => ErrorKind::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
