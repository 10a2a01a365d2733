use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linops::vector::{axpy, dot, norm2, sub, DenseVector};
use crate::linops::{frobenius_diff, LinearOperator, SparseMatrix};

/// A smooth bi-objective problem `min (f_1(x), f_2(x))`.
pub trait ObjectiveModel: Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn values(&self, x: &[f64]) -> [f64; 2];

    fn gradients(&self, x: &[f64]) -> [DenseVector; 2];

    /// `(w_1 H_1(x) + w_2 H_2(x)) v`. Defaults to a forward difference of
    /// the weighted gradient.
    fn hessian_vec(&self, x: &[f64], w: [f64; 2], v: &[f64]) -> DenseVector {
        fd_hessian_vec(self, x, w, v)
    }

    /// Distance from `x` to the Pareto set, when the set is known in closed form.
    fn pareto_distance(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// `w_1 grad f_1(x) + w_2 grad f_2(x)`.
pub fn weighted_gradient<M: ObjectiveModel + ?Sized>(model: &M, x: &[f64], w: [f64; 2]) -> DenseVector {
    let [g1, g2] = model.gradients(x);
    g1.iter().zip(&g2).map(|(a, b)| w[0] * a + w[1] * b).collect()
}

/// Forward-difference Hessian-vector product with step
/// `1e-6 (1 + ||x||) / ||v||` along `v`.
pub fn fd_hessian_vec<M: ObjectiveModel + ?Sized>(model: &M, x: &[f64], w: [f64; 2], v: &[f64]) -> DenseVector {
    let vnorm = norm2(v);
    if vnorm == 0.0 {
        return vec![0.0; v.len()];
    }
    let eps = 1e-6 * (1.0 + norm2(x)) / vnorm;
    let mut xp = x.to_vec();
    axpy(eps, v, &mut xp);
    let g0 = weighted_gradient(model, x, w);
    let g1 = weighted_gradient(model, &xp, w);
    g1.iter().zip(&g0).map(|(a, b)| (a - b) / eps).collect()
}

/// The weighted Hessian at a fixed point as a matrix-free operator.
pub struct HessianOperator<'a, M: ?Sized> {
    model: &'a M,
    x: &'a [f64],
    w: [f64; 2],
}

impl<'a, M: ObjectiveModel + ?Sized> HessianOperator<'a, M> {
    pub fn new(model: &'a M, x: &'a [f64], w: [f64; 2]) -> Self {
        HessianOperator { model, x, w }
    }
}

impl<M: ObjectiveModel + ?Sized> LinearOperator for HessianOperator<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.model.hessian_vec(self.x, self.w, x));
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// `f_1 = x^T A x / 2`, `f_2 = (x - c)^T B (x - c) / 2` with `A`, `B` SPD.
///
/// When `A = B` the Pareto set is the segment `{t c : t in [0, 1]}`.
#[derive(Debug, Clone)]
pub struct BiQuadratic {
    a: SparseMatrix,
    b: SparseMatrix,
    c: DenseVector,
    same: bool,
}

impl BiQuadratic {
    pub fn new(a: SparseMatrix, b: SparseMatrix, c: DenseVector) -> Result<Self> {
        let n = c.len();
        for m in [&a, &b] {
            if !m.is_square() || m.n_rows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n_rows() });
            }
            m.check_symmetry()?;
        }
        let same = frobenius_diff(&a, &b)? == 0.0;
        Ok(BiQuadratic { a, b, c, same })
    }

    /// `A = B` tridiagonal with diagonal `2.2 + u_i`, `u_i ~ U[0, 0.5]`, and
    /// off-diagonals `-1`; `c` has entries `U[-1, 1]`. Eigenvalues lie in
    /// `[0.2, 4.7]`.
    pub fn standard(n: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("model dimension must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::with_capacity(3 * n);
        for i in 0..n {
            trip.push((i, i, 2.2 + rng.random_range(0.0..0.5)));
            if i + 1 < n {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, -1.0));
            }
        }
        let mut a = SparseMatrix::from_triplets(n, n, &trip)?;
        a.mark_symmetric()?;
        let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        BiQuadratic::new(a.clone(), a, c)
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

impl ObjectiveModel for BiQuadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn name(&self) -> String {
        "biquad".into()
    }

    fn values(&self, x: &[f64]) -> [f64; 2] {
        let d = sub(x, &self.c);
        [0.5 * dot(x, &self.a.apply_vec(x)), 0.5 * dot(&d, &self.b.apply_vec(&d))]
    }

    fn gradients(&self, x: &[f64]) -> [DenseVector; 2] {
        [self.a.apply_vec(x), self.b.apply_vec(&sub(x, &self.c))]
    }

    fn hessian_vec(&self, _x: &[f64], w: [f64; 2], v: &[f64]) -> DenseVector {
        let mut y = self.a.apply_vec(v);
        crate::linops::vector::scale(w[0], &mut y);
        axpy(w[1], &self.b.apply_vec(v), &mut y);
        y
    }

    fn pareto_distance(&self, x: &[f64]) -> Option<f64> {
        if !self.same {
            return None;
        }
        let cc = dot(&self.c, &self.c);
        let t = if cc > 0.0 { (dot(x, &self.c) / cc).clamp(0.0, 1.0) } else { 0.0 };
        let mut d = x.to_vec();
        axpy(-t, &self.c, &mut d);
        Some(norm2(&d))
    }
}

/// `f_1 = x^T L x / 2 + g/4 sum x_i^4`, `f_2 = ||x - c||^2 / 2 + g/4 sum (x_i - c_i)^4`
/// with `L = tridiag(-1, 3, -1)`.
#[derive(Debug, Clone)]
pub struct QuarticRegularized {
    c: DenseVector,
    gamma: f64,
}

impl QuarticRegularized {
    pub fn new(c: DenseVector, gamma: f64) -> Result<Self> {
        if c.is_empty() || !(gamma >= 0.0) {
            return Err(Error::InvalidParameter("quartic model needs n >= 1 and gamma >= 0".into()));
        }
        Ok(QuarticRegularized { c, gamma })
    }

    /// `c` with entries `U[-1, 1]` and `gamma = 0.5`.
    pub fn standard(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        QuarticRegularized::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), 0.5)
    }

    fn laplacian(&self, v: &[f64]) -> DenseVector {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut s = 3.0 * v[i];
                if i > 0 {
                    s -= v[i - 1];
                }
                if i + 1 < n {
                    s -= v[i + 1];
                }
                s
            })
            .collect()
    }
}

impl ObjectiveModel for QuarticRegularized {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn name(&self) -> String {
        "quartic".into()
    }

    fn values(&self, x: &[f64]) -> [f64; 2] {
        let q = |v: &[f64]| v.iter().map(|t| t.powi(4)).sum::<f64>() * self.gamma / 4.0;
        let d = sub(x, &self.c);
        [0.5 * dot(x, &self.laplacian(x)) + q(x), 0.5 * dot(&d, &d) + q(&d)]
    }

    fn gradients(&self, x: &[f64]) -> [DenseVector; 2] {
        let mut g1 = self.laplacian(x);
        let d = sub(x, &self.c);
        let mut g2 = d.clone();
        for i in 0..x.len() {
            g1[i] += self.gamma * x[i].powi(3);
            g2[i] += self.gamma * d[i].powi(3);
        }
        [g1, g2]
    }

    fn hessian_vec(&self, x: &[f64], w: [f64; 2], v: &[f64]) -> DenseVector {
        let lv = self.laplacian(v);
        (0..v.len())
            .map(|i| {
                let d = x[i] - self.c[i];
                w[0] * (lv[i] + 3.0 * self.gamma * x[i] * x[i] * v[i]) + w[1] * (v[i] + 3.0 * self.gamma * d * d * v[i])
            })
            .collect()
    }
}
