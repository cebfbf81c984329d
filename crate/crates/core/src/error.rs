use thiserror::Error;

/// Errors raised by the simulator, circuit builders and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid gate: {0}")]
    Validation(String),
    #[error("degenerate projection: probability {0:e} below 1e-14")]
    DegenerateProjection(f64),
    #[error("norm drift {0:e} exceeds 1e-8")]
    NormDrift(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
