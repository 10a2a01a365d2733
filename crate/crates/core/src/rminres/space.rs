use crate::error::{Error, Result};
use crate::linops::vector::{axpy, dot, norm2, DenseVector};
use crate::linops::{orthonormalize, DenseMatrix, LinearOperator, Preconditioner};

/// Recycled directions `U` paired with their image `C = A U`, where `C` has
/// orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RecycleSpace {
    u: DenseMatrix,
    c: DenseMatrix,
}

/// Measured deviation of a [`RecycleSpace`] from its invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecycleCheck {
    /// `||C^T C - I||_F`
    pub orthonormality: f64,
    /// `||A U - C||_F / (||A||_est ||U||_F)`
    pub pairing: f64,
}

impl RecycleSpace {
    pub fn empty(n: usize) -> Self {
        RecycleSpace { u: DenseMatrix::zeros(n, 0), c: DenseMatrix::zeros(n, 0) }
    }

    /// Builds the space spanned by the columns of `u` against `a`:
    /// `C = orthonormalize(A U)` and `U` rescaled so that `A U = C`.
    /// Directions whose images are numerically dependent are dropped.
    pub fn from_directions(a: &dyn LinearOperator, u: &DenseMatrix) -> Result<Self> {
        if u.rows() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: u.rows() });
        }
        let au: Vec<DenseVector> = u.columns().map(|col| a.apply_vec(col)).collect();
        Ok(Self::from_pairs(u.clone(), DenseMatrix::from_columns(u.rows(), &au)))
    }

    /// `au` must equal `A u` column by column.
    pub(crate) fn from_pairs(mut u: DenseMatrix, mut au: DenseMatrix) -> Self {
        let n = u.rows();
        loop {
            let qr = orthonormalize(&au);
            if qr.dropped.is_empty() {
                let u = right_solve_upper(&u, &qr.r);
                return RecycleSpace { u, c: qr.q };
            }
            let keep: Vec<usize> = (0..u.cols()).filter(|j| !qr.dropped.contains(j)).collect();
            let pick = |m: &DenseMatrix| {
                let cols: Vec<DenseVector> = keep.iter().map(|&j| m.col(j).to_vec()).collect();
                DenseMatrix::from_columns(n, &cols)
            };
            u = pick(&u);
            au = pick(&au);
        }
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    /// Number of recycled directions.
    pub fn k(&self) -> usize {
        self.u.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.k() == 0
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    /// Measures both invariants against `a` (costs `k` operator applications).
    pub fn verify(&self, a: &dyn LinearOperator) -> RecycleCheck {
        let k = self.k();
        let ctc = self.c.transpose().matmul(&self.c);
        let orthonormality = ctc.sub(&DenseMatrix::identity(k)).frobenius_norm();
        let mut diff = 0.0;
        let mut anorm: f64 = 0.0;
        for j in 0..k {
            let uj = self.u.col(j);
            let au = a.apply_vec(uj);
            let un = norm2(uj);
            if un > 0.0 {
                anorm = anorm.max(norm2(&au) / un);
            }
            diff += au.iter().zip(self.c.col(j)).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
        }
        let scale = anorm.max(f64::MIN_POSITIVE) * self.u.frobenius_norm().max(f64::MIN_POSITIVE);
        RecycleCheck { orthonormality, pairing: if k == 0 { 0.0 } else { diff.sqrt() / scale } }
    }
}

/// `X` with `X R = U` for upper-triangular square `R`.
fn right_solve_upper(u: &DenseMatrix, r: &DenseMatrix) -> DenseMatrix {
    let k = r.cols();
    let mut x = DenseMatrix::zeros(u.rows(), k);
    for j in 0..k {
        let mut col = u.col(j).to_vec();
        for i in 0..j {
            let rij = r[(i, j)];
            if rij != 0.0 {
                let xi = x.col(i).to_vec();
                axpy(-rij, &xi, &mut col);
            }
        }
        let d = r[(j, j)];
        col.iter_mut().for_each(|v| *v /= d);
        x.col_mut(j).copy_from_slice(&col);
    }
    x
}

/// Working copy of a recycle space rebuilt against the current operator, with
/// `C` orthonormal in the `M^{-1}` inner product (Euclidean when `M` is absent).
pub(crate) struct WorkingSpace {
    pub u: Vec<DenseVector>,
    pub c: Vec<DenseVector>,
    pub c_hat: Vec<DenseVector>,
}

impl WorkingSpace {
    pub fn build(a: &dyn LinearOperator, space: &RecycleSpace, m: Option<&dyn Preconditioner>) -> Self {
        let mut out = WorkingSpace { u: Vec::new(), c: Vec::new(), c_hat: Vec::new() };
        let n = a.dim();
        let mut scale_ref: f64 = 0.0;
        for uj in space.u().columns() {
            let mut u = uj.to_vec();
            let mut c = a.apply_vec(&u);
            let mut ch = match m {
                Some(m) => m.apply_inverse_vec(&c),
                None => c.clone(),
            };
            let first = dot(&c, &ch).max(0.0).sqrt();
            scale_ref = scale_ref.max(first);
            for _pass in 0..2 {
                for i in 0..out.c.len() {
                    let s = dot(&out.c_hat[i], &c);
                    axpy(-s, &out.c[i], &mut c);
                    axpy(-s, &out.c_hat[i], &mut ch);
                    axpy(-s, &out.u[i], &mut u);
                }
            }
            let nrm = dot(&c, &ch).max(0.0).sqrt();
            if !(nrm > crate::linops::RANK_TOL * scale_ref) || n == 0 {
                continue;
            }
            for v in [&mut u, &mut c, &mut ch] {
                v.iter_mut().for_each(|x| *x /= nrm);
            }
            out.u.push(u);
            out.c.push(c);
            out.c_hat.push(ch);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::SparseMatrix;

    #[test]
    fn pairing_holds_after_construction() {
        let a = SparseMatrix::from_diagonal(&[1.0, -2.0, 3.0, 4.0]);
        let u = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        let s = RecycleSpace::from_directions(&a, &u).unwrap();
        assert_eq!(s.k(), 2);
        let check = s.verify(&a);
        assert!(check.orthonormality <= 1e-12 && check.pairing <= 1e-12);
    }

    #[test]
    fn dependent_directions_are_dropped() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let u = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]);
        let s = RecycleSpace::from_directions(&a, &u).unwrap();
        assert_eq!(s.k(), 1);
    }

    #[test]
    fn empty_space() {
        let s = RecycleSpace::empty(5);
        assert!(s.is_empty());
        assert_eq!(s.dim(), 5);
        assert_eq!(s.verify(&SparseMatrix::identity(5)).pairing, 0.0);
    }
}
