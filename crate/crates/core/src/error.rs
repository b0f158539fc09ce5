use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MiError {
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid prior: pseudo-count {0} is negative")]
    InvalidPrior(f64),
    #[error("distribution is undefined: {0}")]
    UndefinedDistribution(String),
    #[error("cell ({row}, {col}) has zero count; apply a positive prior first")]
    ZeroCell { row: usize, col: usize },
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("EM did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        loglik_trace: Vec<f64>,
    },
    #[error("numerical rank deficiency: {0}")]
    Singular(String),
    #[error("infeasible fit: {0}")]
    InfeasibleFit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl MiError {
    /// True for failures caused by malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            MiError::InvalidTable(_)
                | MiError::InvalidPrior(_)
                | MiError::Parse { .. }
                | MiError::Io(_)
                | MiError::InvalidArgument(_)
                | MiError::Unsupported(_)
        )
    }
}

impl From<std::io::Error> for MiError {
    fn from(e: std::io::Error) -> Self {
        MiError::Io(e.to_string())
    }
}

pub type Result<T, E = MiError> = std::result::Result<T, E>;
