use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::sparse::SparseMatrix;
use super::vector::{dot, norm2, DenseVector};

/// Pivots and diagonal entries below this magnitude are treated as zero.
pub const PIVOT_TOL: f64 = 1e-14;

/// Approximate inverse action `z = P^{-1} v`.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]);

    fn description(&self) -> String;

    fn apply_inverse_vec(&self, v: &[f64]) -> DenseVector {
        let mut z = vec![0.0; self.dim()];
        self.apply_inverse(v, &mut z);
        z
    }
}

impl<T: Preconditioner + ?Sized> Preconditioner for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]) {
        (**self).apply_inverse(v, z)
    }

    fn description(&self) -> String {
        (**self).description()
    }
}

#[derive(Debug, Clone)]
pub struct IdentityPreconditioner {
    n: usize,
}

impl IdentityPreconditioner {
    pub fn new(n: usize) -> Self {
        IdentityPreconditioner { n }
    }
}

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]) {
        z.copy_from_slice(v);
    }

    fn description(&self) -> String {
        "identity".into()
    }
}

/// Diagonal scaling by `1 / A_ii`.
#[derive(Debug, Clone)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn inverse_diagonal(&self) -> &[f64] {
        &self.inv_diag
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn dim(&self) -> usize {
        self.inv_diag.len()
    }

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]) {
        for ((zi, vi), d) in z.iter_mut().zip(v).zip(&self.inv_diag) {
            *zi = vi * d;
        }
    }

    fn description(&self) -> String {
        "jacobi".into()
    }
}

pub fn jacobi_precond(a: &SparseMatrix) -> Result<JacobiPreconditioner> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: a.n_cols() });
    }
    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| if d.abs() > PIVOT_TOL { Ok(1.0 / d) } else { Err(Error::ZeroDiagonal { index: i, value: d }) })
        .collect::<Result<_>>()?;
    Ok(JacobiPreconditioner { inv_diag })
}

/// Zero-fill incomplete Cholesky factor `L` (lower triangular, CSC) with
/// `A ~ L L^T`.
#[derive(Debug, Clone)]
pub struct Ic0Preconditioner {
    factor: SparseMatrix,
    shift: f64,
}

impl Ic0Preconditioner {
    pub fn factor(&self) -> &SparseMatrix {
        &self.factor
    }

    /// Diagonal shift that was needed to complete the factorization (0 if none).
    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl Preconditioner for Ic0Preconditioner {
    fn dim(&self) -> usize {
        self.factor.n_rows()
    }

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]) {
        let l = &self.factor;
        let n = l.n_rows();
        z.copy_from_slice(v);
        // L y = v, column oriented; the diagonal is the first entry of each column.
        for j in 0..n {
            let (rows, vals) = l.col(j);
            z[j] /= vals[0];
            let zj = z[j];
            for (&i, &lij) in rows.iter().zip(vals).skip(1) {
                z[i] -= lij * zj;
            }
        }
        // L^T x = y
        for j in (0..n).rev() {
            let (rows, vals) = l.col(j);
            let mut s = z[j];
            for (&i, &lij) in rows.iter().zip(vals).skip(1) {
                s -= lij * z[i];
            }
            z[j] = s / vals[0];
        }
    }

    fn description(&self) -> String {
        if self.shift > 0.0 {
            format!("ic0 (shift {:e})", self.shift)
        } else {
            "ic0".into()
        }
    }
}

/// Incomplete Cholesky with no fill, restricted to the lower-triangular pattern
/// of `A`. A nonpositive pivot triggers one retry on `A + alpha I` with
/// `alpha = 1e-3 max |A_ii|`.
pub fn ic0(a: &SparseMatrix) -> Result<Ic0Preconditioner> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: a.n_cols() });
    }
    let diag = a.diagonal();
    if let Some((i, &d)) = diag.iter().enumerate().find(|(_, &d)| d <= 0.0) {
        return Err(Error::ZeroDiagonal { index: i, value: d });
    }
    match ic0_factor(a, 0.0) {
        Ok(factor) => Ok(Ic0Preconditioner { factor, shift: 0.0 }),
        Err(_) => {
            let shift = 1e-3 * diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let factor = ic0_factor(a, shift)?;
            Ok(Ic0Preconditioner { factor, shift })
        }
    }
}

fn ic0_factor(a: &SparseMatrix, shift: f64) -> Result<SparseMatrix> {
    let n = a.n_rows();
    let mut col_ptr = vec![0];
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    for j in 0..n {
        let (rows, v) = a.col(j);
        let start = rows.partition_point(|&i| i < j);
        if rows.get(start) != Some(&j) {
            return Err(Error::ZeroDiagonal { index: j, value: 0.0 });
        }
        for (&i, &x) in rows[start..].iter().zip(&v[start..]) {
            row_idx.push(i);
            vals.push(if i == j { x + shift } else { x });
        }
        col_ptr.push(row_idx.len());
    }

    // Right-looking elimination, dropping updates that fall outside the pattern.
    for k in 0..n {
        let (lo, hi) = (col_ptr[k], col_ptr[k + 1]);
        let pivot = vals[lo];
        if !(pivot > PIVOT_TOL) {
            return Err(Error::NotIcFactorizable { index: k });
        }
        let d = pivot.sqrt();
        vals[lo] = d;
        for v in &mut vals[lo + 1..hi] {
            *v /= d;
        }
        for p in lo + 1..hi {
            let j = row_idx[p];
            let ljk = vals[p];
            let (jlo, jhi) = (col_ptr[j], col_ptr[j + 1]);
            for q in p..hi {
                let i = row_idx[q];
                if let Ok(pos) = row_idx[jlo..jhi].binary_search(&i) {
                    vals[jlo + pos] -= vals[q] * ljk;
                }
            }
        }
    }
    SparseMatrix::new(n, n, col_ptr, row_idx, vals)
}

/// Probes `M^{-1}` on `probes` random vectors for symmetry and positivity.
/// Returns false as soon as either fails.
pub fn probe_spd(m: &dyn Preconditioner, probes: usize, seed: u64) -> bool {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let x: DenseVector = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: DenseVector = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mx = m.apply_inverse_vec(&x);
        let my = m.apply_inverse_vec(&y);
        if dot(&x, &mx) <= 0.0 {
            return false;
        }
        let scale = norm2(&mx) * norm2(&y) + norm2(&x) * norm2(&my);
        if (dot(&mx, &y) - dot(&x, &my)).abs() > 1e-10 * scale {
            return false;
        }
    }
    true
}
