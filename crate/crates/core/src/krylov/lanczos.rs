use crate::linops::vector::{axpy, dot, DenseVector};
use crate::linops::{LinearOperator, Preconditioner};

/// Relative size (against the running `||T||` estimate) below which a new
/// off-diagonal entry is treated as a happy breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// Symmetric Lanczos tridiagonalization, optionally preconditioned and
/// optionally deflated against a fixed subspace.
///
/// With a preconditioner `M`, the vectors `q_k` are orthonormal in the
/// `M^{-1}` inner product and `z_k = M^{-1} q_k`; without one `z_k = q_k`.
/// After `k` steps `alpha` and `beta` both have `k` entries: `alpha` is the
/// diagonal of `T_k` and `beta[i]` couples `q_{i+1}` to `q_{i+2}`, so
/// `beta[k-1]` is the subdiagonal entry that extends `T_k` to the
/// `(k+1) x k` matrix.
#[derive(Debug, Clone)]
pub struct LanczosState {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    q: Vec<DenseVector>,
    z: Option<Vec<DenseVector>>,
    retain_all: bool,
    reorthogonalize: bool,
    breakdown: bool,
    tnorm: f64,
}

pub(crate) struct StepOutput {
    /// Solution-space image of the vector that was expanded, `z_k`.
    pub z: DenseVector,
    pub alpha: f64,
    pub beta: f64,
    /// Coefficients of `A z_k` removed along the deflation space.
    pub deflation: Vec<f64>,
}

/// Fixed subspace removed from every new Lanczos vector: `c` (image space,
/// `M^{-1}`-orthonormal) and `c_hat = M^{-1} c`.
pub(crate) struct DeflationBasis<'a> {
    pub c: &'a [DenseVector],
    pub c_hat: &'a [DenseVector],
}

impl LanczosState {
    /// Starts from `v0` (normalized here). `reorthogonalize` keeps the whole
    /// basis and orthogonalizes each new vector against it.
    pub fn new(v0: &[f64], reorthogonalize: bool, m: Option<&dyn Preconditioner>) -> Self {
        Self::with_storage(v0, reorthogonalize, reorthogonalize, m)
    }

    pub(crate) fn with_storage(
        v0: &[f64],
        retain_all: bool,
        reorthogonalize: bool,
        m: Option<&dyn Preconditioner>,
    ) -> Self {
        let mut q = v0.to_vec();
        let mut z = m.map(|m| m.apply_inverse_vec(&q));
        let nrm = dot(&q, z.as_ref().unwrap_or(&q)).max(0.0).sqrt();
        let breakdown = !(nrm > 0.0);
        if !breakdown {
            q.iter_mut().for_each(|v| *v /= nrm);
            if let Some(z) = z.as_mut() {
                z.iter_mut().for_each(|v| *v /= nrm);
            }
        }
        LanczosState {
            alpha: Vec::new(),
            beta: Vec::new(),
            q: vec![q],
            z: z.map(|z| vec![z]),
            retain_all: retain_all || reorthogonalize,
            reorthogonalize,
            breakdown,
            tnorm: 0.0,
        }
    }

    /// True once a step produced a (numerically) zero off-diagonal, i.e. the
    /// Krylov space is invariant.
    pub fn is_breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn steps(&self) -> usize {
        self.alpha.len()
    }

    /// Retained Lanczos vectors `q` (all of them when the basis is retained,
    /// otherwise at most the last two).
    pub fn basis(&self) -> &[DenseVector] {
        &self.q
    }

    /// Retained `M^{-1} q` vectors; identical to [`basis`](Self::basis) when
    /// unpreconditioned.
    pub fn solution_basis(&self) -> &[DenseVector] {
        self.z.as_deref().unwrap_or(&self.q)
    }

    /// Dense `k x k` tridiagonal `T_k`.
    pub fn tridiagonal(&self) -> crate::linops::DenseMatrix {
        let k = self.alpha.len();
        let mut t = crate::linops::DenseMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = self.alpha[i];
            if i + 1 < k {
                t[(i + 1, i)] = self.beta[i];
                t[(i, i + 1)] = self.beta[i];
            }
        }
        t
    }

    /// One Lanczos step: `A z_k`, removal of the deflation space, three-term
    /// recurrence, optional reorthogonalization, normalization.
    pub(crate) fn step(
        &mut self,
        a: &dyn LinearOperator,
        m: Option<&dyn Preconditioner>,
        deflation: Option<&DeflationBasis<'_>>,
    ) -> StepOutput {
        debug_assert!(!self.breakdown, "step after breakdown");
        let k = self.alpha.len();
        let cur = self.q.len() - 1;
        let z_k = self.solution_basis()[cur].clone();
        let mut p = a.apply_vec(&z_k);

        let mut defl = Vec::new();
        if let Some(d) = deflation {
            defl = d.c_hat.iter().map(|ch| dot(ch, &p)).collect();
            for (ci, &s) in d.c.iter().zip(&defl) {
                axpy(-s, ci, &mut p);
            }
        }

        let alpha = dot(&z_k, &p);
        axpy(-alpha, &self.q[cur], &mut p);
        let beta_prev = if k > 0 { self.beta[k - 1] } else { 0.0 };
        if cur > 0 {
            axpy(-beta_prev, &self.q[cur - 1], &mut p);
        }

        if self.reorthogonalize {
            for _pass in 0..2 {
                for j in 0..self.q.len() {
                    let s = dot(&self.solution_basis()[j], &p);
                    axpy(-s, &self.q[j], &mut p);
                }
                if let Some(d) = deflation {
                    for (i, (ci, ch)) in d.c.iter().zip(d.c_hat).enumerate() {
                        let s = dot(ch, &p);
                        axpy(-s, ci, &mut p);
                        defl[i] += s;
                    }
                }
            }
        }

        let mut z_next = m.map(|m| m.apply_inverse_vec(&p));
        let beta2 = dot(&p, z_next.as_ref().unwrap_or(&p));
        let beta = if beta2.is_nan() { f64::NAN } else { beta2.max(0.0).sqrt() };

        self.tnorm = self.tnorm.max(alpha.abs() + beta_prev + beta);
        self.alpha.push(alpha);
        self.beta.push(beta);

        if beta <= BREAKDOWN_TOL * self.tnorm || beta == 0.0 {
            self.breakdown = true;
        } else if beta.is_finite() {
            p.iter_mut().for_each(|v| *v /= beta);
            if let Some(z) = z_next.as_mut() {
                z.iter_mut().for_each(|v| *v /= beta);
            }
            if !self.retain_all {
                self.q.drain(..self.q.len().saturating_sub(1));
                if let Some(zs) = self.z.as_mut() {
                    zs.drain(..zs.len().saturating_sub(1));
                }
            }
            self.q.push(p);
            if let (Some(zs), Some(z)) = (self.z.as_mut(), z_next) {
                zs.push(z);
            }
        }

        StepOutput { z: z_k, alpha, beta, deflation: defl }
    }
}

/// Advances `state` by one Lanczos step (no-op after breakdown).
pub fn lanczos_step(a: &dyn LinearOperator, state: &mut LanczosState, m: Option<&dyn Preconditioner>) {
    if !state.breakdown {
        state.step(a, m, None);
    }
}
