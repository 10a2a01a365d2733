use super::dense::DenseMatrix;
use super::vector::{axpy, dot, norm2};

/// Columns whose remaining norm falls below this fraction of `||V||_F` are dropped.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Orthonormalized {
    /// `n x r` with orthonormal columns, `r` = number of kept columns.
    pub q: DenseMatrix,
    /// `r x cols`, upper triangular (echelon form when columns were dropped).
    pub r: DenseMatrix,
    /// Indices of input columns that were numerically dependent on earlier ones.
    pub dropped: Vec<usize>,
}

/// Modified Gram-Schmidt with one full reorthogonalization pass.
pub fn orthonormalize(v: &DenseMatrix) -> Orthonormalized {
    let n = v.rows();
    let tol = RANK_TOL * v.frobenius_norm();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(v.cols());
    let mut dropped = Vec::new();

    for j in 0..v.cols() {
        let mut w = v.col(j).to_vec();
        let mut c = vec![0.0; basis.len()];
        for _pass in 0..2 {
            for (k, q) in basis.iter().enumerate() {
                let h = dot(q, &w);
                axpy(-h, q, &mut w);
                c[k] += h;
            }
        }
        let nrm = norm2(&w);
        if nrm <= tol || nrm == 0.0 {
            dropped.push(j);
            coeffs.push(c);
            continue;
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        c.push(nrm);
        basis.push(w);
        coeffs.push(c);
    }

    let r_rows = basis.len();
    let mut r = DenseMatrix::zeros(r_rows, v.cols());
    for (j, c) in coeffs.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            r[(i, j)] = x;
        }
    }
    Orthonormalized { q: DenseMatrix::from_columns(n, &basis), r, dropped }
}
