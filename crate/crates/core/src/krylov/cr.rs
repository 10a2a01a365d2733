use crate::error::{Error, Result};
use crate::linops::vector::{all_finite, axpy, dot, norm2, DenseVector};
use crate::linops::LinearOperator;

use super::{check_dims, SolveOptions, SolveReport};

/// State after one pass of the conjugate residual loop body.
#[derive(Debug, Clone, PartialEq)]
pub struct CrStep {
    pub alpha: f64,
    pub beta: f64,
    pub x: DenseVector,
    pub r: DenseVector,
}

/// Conjugate residual method for symmetric `H v = b`.
///
/// The loop follows the textbook recurrence one line at a time: `r0 = b - H x0`,
/// `p0 = r0`, then `alpha = (H r)^T r / ||H p||^2`, the `x` and `r` updates,
/// `beta = (H r')^T r' / (H r)^T r` and `p' = r' + beta p`. `H p` is carried by
/// the matching recurrence `H p' = H r' + beta H p`, so each iteration costs one
/// operator application.
pub fn cr_solve(
    h: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
) -> Result<(DenseVector, SolveReport)> {
    cr_impl(h, b, x0, opts, |_| {})
}

/// [`cr_solve`] that also returns every iterate `(alpha_i, beta_i, x_{i+1}, r_{i+1})`.
pub fn cr_solve_traced(
    h: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
) -> (Result<(DenseVector, SolveReport)>, Vec<CrStep>) {
    let mut steps = Vec::new();
    let out = cr_impl(h, b, x0, opts, |s| steps.push(s));
    (out, steps)
}

fn cr_impl(
    h: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
    mut trace: impl FnMut(CrStep),
) -> Result<(DenseVector, SolveReport)> {
    opts.validate()?;
    let n = h.dim();
    check_dims(n, b, x0)?;
    let max_iter = opts.max_iter_for(n);

    let bnorm = norm2(b);
    if bnorm == 0.0 {
        let report = SolveReport {
            iterations: 0,
            relres_history: if opts.record_history { vec![0.0] } else { Vec::new() },
            converged: true,
            final_relres: 0.0,
        };
        return Ok((vec![0.0; n], report));
    }
    let relres = |r: &[f64]| norm2(r) / bnorm;

    let mut x = x0.to_vec();
    let mut r = b.to_vec();
    axpy(-1.0, &h.apply_vec(&x), &mut r);
    let mut p = r.clone();
    let mut hr = h.apply_vec(&r);
    let mut hp = hr.clone();
    let mut rho = dot(&hr, &r);

    let mut history = Vec::new();
    let mut res = relres(&r);
    if opts.record_history {
        history.push(res);
    }

    let mut i = 0;
    while i < max_iter && res > opts.tol {
        let hp2 = dot(&hp, &hp);
        if hp2.sqrt() < 1e-30 {
            return Err(Error::CrBreakdown { iteration: i, reason: "||H p|| vanished" });
        }
        let alpha = rho / hp2;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &hp, &mut r);
        h.apply(&r, &mut hr);
        let rho_next = dot(&hr, &r);
        let beta = rho_next / rho;
        if !alpha.is_finite() || !all_finite(&r) {
            return Err(Error::NumericalBreakdown { iteration: i });
        }
        res = relres(&r);
        if !beta.is_finite() && res > opts.tol {
            return Err(Error::CrBreakdown { iteration: i, reason: "(H r)^T r vanished" });
        }
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
            hp[k] = hr[k] + beta * hp[k];
        }
        rho = rho_next;
        trace(CrStep { alpha, beta, x: x.clone(), r: r.clone() });
        i += 1;
        if opts.record_history {
            history.push(res);
        }
    }

    let report = SolveReport { iterations: i, relres_history: history, converged: res <= opts.tol, final_relres: res };
    Ok((x, report))
}
