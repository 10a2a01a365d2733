use crate::error::{Error, Result};
use crate::linops::vector::{axpy, dot, DenseVector};
use crate::linops::{LinearOperator, Preconditioner};

use super::lanczos::{DeflationBasis, LanczosState};
use super::{check_dims, SolveOptions, SolveReport};

/// Recycled subspace handed to the engine: `a u_i = c_i`, `c` orthonormal in
/// the `M^{-1}` inner product, `c_hat = M^{-1} c`.
pub(crate) struct Deflation<'a> {
    pub u: &'a [DenseVector],
    pub c: &'a [DenseVector],
    pub c_hat: &'a [DenseVector],
}

pub(crate) struct EngineOutput {
    pub x: DenseVector,
    pub report: SolveReport,
    /// Lanczos process at exit (retains the basis when requested).
    pub lanczos: LanczosState,
    /// Deflation coefficients `C^T M^{-1} A z_k`, one vector per iteration.
    pub deflation_coeffs: Vec<Vec<f64>>,
}

/// MINRES for symmetric `A x = b` with an optional SPD preconditioner.
///
/// Each iterate minimizes `||b - A x_k||` (the `M^{-1}`-norm when
/// preconditioned) over `x0 + K_k`. The recorded relative residuals are the
/// recurrence values `phibar_k / ||b||`.
pub fn minres_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
    m: Option<&dyn Preconditioner>,
) -> Result<(DenseVector, SolveReport)> {
    opts.validate()?;
    check_dims(a.dim(), b, x0)?;
    if let Some(m) = m {
        if m.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: m.dim() });
        }
    }
    let mut r0 = b.to_vec();
    axpy(-1.0, &a.apply_vec(x0), &mut r0);
    let reorth = opts.reorthogonalize.unwrap_or(false);
    let out = minres_engine(a, b, x0.to_vec(), r0, opts, m, None, reorth, |_, _| {})?;
    Ok((out.x, out.report))
}

/// Shared MINRES loop used by both the plain and the recycling solver.
///
/// `r_start = b - A x_start` must already be orthogonal to the deflation
/// space when one is given. `on_iterate(k, &x_k)` is called after every
/// update.
#[allow(clippy::too_many_arguments)]
pub(crate) fn minres_engine(
    a: &dyn LinearOperator,
    b: &[f64],
    x_start: DenseVector,
    r_start: DenseVector,
    opts: &SolveOptions,
    m: Option<&dyn Preconditioner>,
    deflation: Option<&Deflation<'_>>,
    retain_basis: bool,
    mut on_iterate: impl FnMut(usize, &[f64]),
) -> Result<EngineOutput> {
    let n = a.dim();
    let max_iter = opts.max_iter_for(n);
    let reorth = opts.reorthogonalize.unwrap_or(retain_basis);

    let bnorm = match m {
        Some(m) => {
            let v = dot(b, &m.apply_inverse_vec(b));
            if v < 0.0 {
                return Err(Error::IndefinitePreconditioner { value: v });
            }
            v.sqrt()
        }
        None => dot(b, b).sqrt(),
    };
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };

    let mut lanczos = LanczosState::with_storage(&r_start, retain_basis, reorth, m);
    let beta1 = match m {
        Some(m) => {
            let v = dot(&r_start, &m.apply_inverse_vec(&r_start));
            if v < 0.0 {
                return Err(Error::IndefinitePreconditioner { value: v });
            }
            v.sqrt()
        }
        None => dot(&r_start, &r_start).sqrt(),
    };

    let mut x = x_start;
    let mut history = Vec::new();
    let mut relres = beta1 / scale;
    if opts.record_history {
        history.push(relres);
    }
    let mut deflation_coeffs = Vec::new();

    if relres <= opts.tol || beta1 == 0.0 {
        let report =
            SolveReport { iterations: 0, relres_history: history, converged: relres <= opts.tol, final_relres: relres };
        return Ok(EngineOutput { x, report, lanczos, deflation_coeffs });
    }

    let defl_basis = deflation.map(|d| DeflationBasis { c: d.c, c_hat: d.c_hat });

    // Givens QR of the (k+1) x k tridiagonal, applied on the fly.
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let (mut dbar, mut epsln) = (0.0f64, 0.0f64);
    let mut phibar = beta1;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut w1;

    let mut itn = 0;
    while itn < max_iter {
        itn += 1;
        let step = lanczos.step(a, m, defl_basis.as_ref());
        let (alpha, beta) = (step.alpha, step.beta);
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NumericalBreakdown { iteration: itn });
        }

        // Search direction in solution space: z_k - U b_k.
        let mut v = step.z;
        if let Some(d) = deflation {
            for (ui, &s) in d.u.iter().zip(&step.deflation) {
                axpy(-s, ui, &mut v);
            }
            deflation_coeffs.push(step.deflation);
        }

        let oldeps = epsln;
        let delta = cs * dbar + sn * alpha;
        let gbar = sn * dbar - cs * alpha;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = v;
        for i in 0..n {
            w[i] = (w[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);
        if !phi.is_finite() {
            return Err(Error::NumericalBreakdown { iteration: itn });
        }
        on_iterate(itn, &x);

        relres = phibar.abs() / scale;
        if opts.record_history {
            history.push(relres);
        }
        if relres <= opts.tol || lanczos.is_breakdown() {
            break;
        }
    }

    let report =
        SolveReport { iterations: itn, relres_history: history, converged: relres <= opts.tol, final_relres: relres };
    Ok(EngineOutput { x, report, lanczos, deflation_coeffs })
}
