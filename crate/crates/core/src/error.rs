use std::path::PathBuf;

use crate::krylov::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is numerically singular (estimated |lambda_min|/|lambda_max| = {ratio:e})")]
    NumericallySingular { ratio: f64 },

    #[error("diagonal entry {index} is zero or too small ({value:e})")]
    ZeroDiagonal { index: usize, value: f64 },

    #[error("matrix is not IC-factorizable: nonpositive pivot at index {index} after diagonal shift")]
    NotIcFactorizable { index: usize },

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("CR breakdown at iteration {iteration}: {reason}")]
    CrBreakdown { iteration: usize, reason: &'static str },

    #[error("numerical breakdown at iteration {iteration}: non-finite value in recurrence")]
    NumericalBreakdown { iteration: usize },

    #[error("preconditioner is not positive definite (r^T M^-1 r = {value:e})")]
    IndefinitePreconditioner { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("solver did not converge after {} iterations (relres {:e})", .report.iterations, .report.final_relres)]
    NotConverged { report: SolveReport },

    #[error("corrector did not reach stationarity after {iterations} iterations (gradient norm {grad_norm:e})")]
    CorrectorFailed { iterations: usize, grad_norm: f64, x: Vec<f64> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
