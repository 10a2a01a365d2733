//! Core numeric types: dense and sparse matrices, matrix-free operators,
//! orthonormalization, condition estimates and the basic preconditioners.

mod cond;
mod dense;
mod operator;
mod ortho;
mod precond;
mod sparse;
pub mod vector;

pub use cond::{cond_estimate, cond_exact, EXACT_COND_MAX_DIM};
pub use dense::DenseMatrix;
pub use operator::{check_linearity, check_symmetry, densify, FnOperator, LinearOperator};
pub use ortho::{orthonormalize, Orthonormalized, RANK_TOL};
pub use precond::{
    ic0, jacobi_precond, probe_spd, Ic0Preconditioner, IdentityPreconditioner, JacobiPreconditioner, Preconditioner,
    PIVOT_TOL,
};
pub use sparse::{frobenius_diff, SparseMatrix, SYMMETRY_TOL};
pub use vector::DenseVector;
