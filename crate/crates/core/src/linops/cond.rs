use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::krylov::{lanczos_step, LanczosState};

use super::sparse::SparseMatrix;

/// Largest dimension accepted by [`cond_exact`].
pub const EXACT_COND_MAX_DIM: usize = 500;

const SINGULAR_RATIO: f64 = 1e-14;

/// Seed of the fixed Lanczos start vector, so estimates are reproducible.
const START_SEED: u64 = 0x05ee_dc0d;

/// Estimates `|lambda|_max / |lambda|_min` from the Ritz values of a
/// fully reorthogonalized Lanczos run of length `min(iters, n)`.
pub fn cond_estimate(a: &SparseMatrix, iters: usize) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: a.n_cols() });
    }
    let n = a.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let v0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut state = LanczosState::new(&v0, true, None);
    for _ in 0..iters.clamp(1, n) {
        lanczos_step(a, &mut state, None);
        if state.is_breakdown() {
            break;
        }
    }
    let eig = SymmetricEigen::new(state.tridiagonal().to_nalgebra());
    magnitude_ratio(eig.eigenvalues.iter().copied())
}

/// Exact ratio from a dense symmetric eigendecomposition (`n <= 500`).
pub fn cond_exact(a: &SparseMatrix) -> Result<f64> {
    if a.n_rows() > EXACT_COND_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "exact condition number limited to n <= {EXACT_COND_MAX_DIM}, got {}",
            a.n_rows()
        )));
    }
    let eig = SymmetricEigen::new(a.to_dense().to_nalgebra());
    magnitude_ratio(eig.eigenvalues.iter().copied())
}

fn magnitude_ratio(eigs: impl Iterator<Item = f64>) -> Result<f64> {
    let (lo, hi) = eigs.fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l.abs()), hi.max(l.abs())));
    if hi == 0.0 || lo < SINGULAR_RATIO * hi {
        return Err(Error::NumericallySingular { ratio: if hi == 0.0 { 0.0 } else { lo / hi } });
    }
    Ok(hi / lo)
}
