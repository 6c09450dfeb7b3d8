use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("cannot normalize: {0}")]
    ZeroNorm(String),

    #[error("{operation} is not supported in {dim} dimension(s)")]
    UnsupportedDimension { operation: &'static str, dim: usize },

    /// The requested problem has no minimizer (attractive 3D gas, over-critical rotation).
    #[error("no ground state exists: {0}")]
    Nonexistence(String),

    #[error("numerical failure at iteration {iteration}: {reason}")]
    NumericalFailure { iteration: usize, reason: String },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("blow-up or instability at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed field dump: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
