//! Recycling MINRES: projection onto a recycle space carried over from the
//! previous system, MINRES on the deflated operator, and harmonic Ritz
//! extraction of the next recycle space.

mod ritz;
mod space;

use crate::error::{Error, Result};
use crate::krylov::{check_dims, minres_engine, Deflation, SolveOptions, SolveReport};
use crate::linops::vector::{axpy, dot, DenseVector};
use crate::linops::{DenseMatrix, LinearOperator, Preconditioner};

pub use ritz::ritz_extract;
pub use space::{RecycleCheck, RecycleSpace};

use ritz::harmonic_extract;
use space::WorkingSpace;

/// Recycle dimension used when none is given.
pub const DEFAULT_RECYCLE_DIM: usize = 10;

/// Projects the initial guess onto the recycle space:
/// `x1 = x0 + U C^T r0`, `r1 = r0 - C C^T r0` with `r0 = b - A x0`.
///
/// `space` must have been built against `a`, so that `r1 = b - A x1`.
pub fn project_initial(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    space: &RecycleSpace,
) -> Result<(DenseVector, DenseVector)> {
    check_dims(a.dim(), b, x0)?;
    if space.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: space.dim() });
    }
    let mut r = b.to_vec();
    axpy(-1.0, &a.apply_vec(x0), &mut r);
    let mut x = x0.to_vec();
    let coeffs: Vec<f64> = space.c().columns().map(|c| dot(c, &r)).collect();
    for (j, &s) in coeffs.iter().enumerate() {
        axpy(s, space.u().col(j), &mut x);
        axpy(-s, space.c().col(j), &mut r);
    }
    Ok((x, r))
}

/// Per-iteration view handed to [`rminres_solve_monitored`].
pub struct IterateInfo<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    /// Recycle image basis rebuilt against the current operator
    /// (orthonormal in the `M^{-1}` inner product).
    pub c: &'a [DenseVector],
    /// `M^{-1} c` (equal to `c` without a preconditioner).
    pub c_hat: &'a [DenseVector],
}

/// Recycling MINRES.
///
/// With `recycle_in` given, its directions `U` are re-paired with the current
/// operator (`C = A U` orthonormalized), the initial guess is projected onto
/// them, and every Lanczos vector is kept orthogonal to `C`. The iterates
/// minimize the residual over `x1 + range(U) + K_k((I - C C^T) A, r1)`.
/// On exit a new space of at most `k_out` harmonic Ritz vectors is extracted
/// from `[U, V_k]`. With `recycle_in = None` and `k_out = 0` this is exactly
/// [`minres_solve`](crate::krylov::minres_solve).
pub fn rminres_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
    recycle_in: Option<&RecycleSpace>,
    m: Option<&dyn Preconditioner>,
    k_out: usize,
) -> Result<(DenseVector, SolveReport, RecycleSpace)> {
    rminres_solve_monitored(a, b, x0, opts, recycle_in, m, k_out, |_| {})
}

/// [`rminres_solve`] calling `monitor` after every iteration.
#[allow(clippy::too_many_arguments)]
pub fn rminres_solve_monitored(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
    recycle_in: Option<&RecycleSpace>,
    m: Option<&dyn Preconditioner>,
    k_out: usize,
    mut monitor: impl FnMut(IterateInfo<'_>),
) -> Result<(DenseVector, SolveReport, RecycleSpace)> {
    opts.validate()?;
    let n = a.dim();
    check_dims(n, b, x0)?;
    if let Some(m) = m {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    if let Some(r) = recycle_in {
        if r.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.dim() });
        }
    }

    let work = match recycle_in {
        Some(r) if !r.is_empty() => WorkingSpace::build(a, r, m),
        _ => WorkingSpace { u: Vec::new(), c: Vec::new(), c_hat: Vec::new() },
    };

    let mut r0 = b.to_vec();
    axpy(-1.0, &a.apply_vec(x0), &mut r0);
    let mut x1 = x0.to_vec();
    for ((u, c), ch) in work.u.iter().zip(&work.c).zip(&work.c_hat) {
        let s = dot(ch, &r0);
        axpy(s, u, &mut x1);
        axpy(-s, c, &mut r0);
    }

    let deflation = Deflation { u: &work.u, c: &work.c, c_hat: &work.c_hat };
    let deflation = (!work.u.is_empty()).then_some(&deflation);
    let retain = k_out > 0;
    let out = minres_engine(a, b, x1, r0, opts, m, deflation, retain, |k, x| {
        monitor(IterateInfo { iteration: k, x, c: &work.c, c_hat: &work.c_hat })
    })?;

    if k_out == 0 {
        return Ok((out.x, out.report, RecycleSpace::empty(n)));
    }

    // Search space W = [U, Z_k] with A W = [C, Q_{k+1}] G,
    // G = [[I, B_k], [0, T_k (underlined)]].
    let lz = &out.lanczos;
    let steps = lz.steps();
    let kc = work.u.len();
    let q_rows = lz.basis().len().min(steps + 1);
    let mut g = DenseMatrix::zeros(kc + q_rows, kc + steps);
    for i in 0..kc {
        g[(i, i)] = 1.0;
    }
    for (j, coeffs) in out.deflation_coeffs.iter().enumerate() {
        for (i, &s) in coeffs.iter().enumerate() {
            g[(i, kc + j)] = s;
        }
    }
    for j in 0..steps {
        g[(kc + j, kc + j)] = lz.alpha[j];
        if j + 1 < q_rows {
            g[(kc + j + 1, kc + j)] = lz.beta[j];
        }
        if j + 1 < steps {
            g[(kc + j, kc + j + 1)] = lz.beta[j];
        }
    }
    let zb = lz.solution_basis();
    let w: Vec<&[f64]> = work.u.iter().chain(&zb[..steps]).map(Vec::as_slice).collect();
    let phi: Vec<&[f64]> = work.c.iter().chain(&lz.basis()[..q_rows]).map(Vec::as_slice).collect();
    let space = harmonic_extract(&w, &phi, &g, k_out);
    Ok((out.x, out.report, space))
}
