use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::DenseMatrix;
use super::sparse::SparseMatrix;
use super::vector::{axpy, dot, norm2, DenseVector};

/// A square linear map available only through its action on vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Declared symmetry. Not verified; see [`check_symmetry`].
    fn is_symmetric(&self) -> bool;

    fn apply_vec(&self, x: &[f64]) -> DenseVector {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y).expect("operator applied to vector of wrong length");
    }

    fn is_symmetric(&self) -> bool {
        SparseMatrix::is_symmetric(self)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.rows(), self.cols());
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.matvec(x));
    }

    fn is_symmetric(&self) -> bool {
        let n = self.rows();
        (0..n).all(|j| (0..j).all(|i| self[(i, j)] == self[(j, i)]))
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }

    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
}

/// Wraps a closure as a matrix-free operator.
pub struct FnOperator<F> {
    dim: usize,
    symmetric: bool,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, symmetric: bool, f: F) -> Self {
        FnOperator { dim, symmetric, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Materializes an operator column by column (n applications).
pub fn densify(op: &dyn LinearOperator) -> DenseMatrix {
    let n = op.dim();
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, out.col_mut(j));
        e[j] = 0.0;
    }
    out
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DenseVector {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Largest relative deviation from `A(ax + by) = a A x + b A y` over `probes`
/// random triples.
pub fn check_linearity(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        let mut combo = x.clone();
        combo.iter_mut().for_each(|v| *v *= a);
        axpy(b, &y, &mut combo);
        let lhs = op.apply_vec(&combo);
        let mut rhs = op.apply_vec(&x);
        rhs.iter_mut().for_each(|v| *v *= a);
        axpy(b, &op.apply_vec(&y), &mut rhs);
        let scale = norm2(&rhs).max(norm2(&lhs)).max(f64::MIN_POSITIVE);
        let err: f64 = lhs.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(err / scale);
    }
    worst
}

/// Largest relative asymmetry `|<Ax, y> - <x, Ay>| / (|Ax||y| + |x||Ay|)` over
/// `probes` random pairs.
pub fn check_symmetry(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);
        let ax = op.apply_vec(&x);
        let ay = op.apply_vec(&y);
        let scale = norm2(&ax) * norm2(&y) + norm2(&x) * norm2(&ay);
        if scale > 0.0 {
            worst = worst.max((dot(&ax, &y) - dot(&x, &ay)).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_operator_is_linear_and_symmetric() {
        let mut a = SparseMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (2, 2, 5.0)]).unwrap();
        a.mark_symmetric().unwrap();
        assert!(check_linearity(&a, 20, 3) < 1e-14);
        assert!(check_symmetry(&a, 20, 3) < 1e-14);
        assert!(LinearOperator::is_symmetric(&a));
    }

    #[test]
    fn closure_operator_densifies() {
        let op = FnOperator::new(3, true, |x: &[f64], y: &mut [f64]| {
            for i in 0..3 {
                y[i] = (i as f64 + 1.0) * x[i];
            }
        });
        let d = densify(&op);
        assert_eq!(d, DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]));
    }

    #[test]
    fn nonsymmetric_operator_is_detected() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(check_symmetry(&a, 10, 1) > 1e-3);
    }
}
