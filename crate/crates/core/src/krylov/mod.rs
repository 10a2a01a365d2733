//! Baseline symmetric solvers: the conjugate residual recurrence and MINRES
//! built on Lanczos tridiagonalization with Givens rotations.

mod cr;
mod lanczos;
mod minres;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cr::{cr_solve, cr_solve_traced, CrStep};
pub use lanczos::{lanczos_step, LanczosState};
pub use minres::minres_solve;
pub(crate) use minres::{minres_engine, Deflation};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative residual tolerance `||r_k|| / ||b||`.
    pub tol: f64,
    /// Iteration cap; `None` means the system dimension.
    pub max_iter: Option<usize>,
    pub record_history: bool,
    /// Full reorthogonalization of the Lanczos basis. `None` picks the
    /// solver's default (off for MINRES, on for RMINRES when it retains a basis).
    pub reorthogonalize: Option<bool>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iter: None, record_history: true, reorthogonalize: None }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(n).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||r_k|| / ||b||` for k = 0..=iterations (empty unless recorded).
    pub relres_history: Vec<f64>,
    pub converged: bool,
    pub final_relres: f64,
}

pub(crate) fn check_dims(n: usize, b: &[f64], x0: &[f64]) -> Result<()> {
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_validation() {
        assert!(SolveOptions::default().validate().is_ok());
        assert!(SolveOptions::with_tol(-1.0).validate().is_err());
        assert!(SolveOptions::with_tol(f64::NAN).validate().is_err());
        assert_eq!(SolveOptions::default().max_iter_for(7), 7);
        assert_eq!(SolveOptions { max_iter: Some(3), ..Default::default() }.max_iter_for(7), 3);
    }
}
