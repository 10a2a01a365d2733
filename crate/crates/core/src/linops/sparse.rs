use crate::error::{Error, Result};

use super::dense::DenseMatrix;
use super::vector::DenseVector;

/// Absolute tolerance used when validating a declared symmetric matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Compressed sparse-column matrix with strictly increasing row indices per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSC arrays, validating the structural invariants.
    pub fn new(n_rows: usize, n_cols: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, vals: Vec<f64>) -> Result<Self> {
        if col_ptr.len() != n_cols + 1 {
            return Err(Error::DimensionMismatch { expected: n_cols + 1, found: col_ptr.len() });
        }
        if row_idx.len() != vals.len() {
            return Err(Error::DimensionMismatch { expected: row_idx.len(), found: vals.len() });
        }
        if col_ptr[0] != 0 || col_ptr[n_cols] != row_idx.len() {
            return Err(Error::InvalidParameter("col_ptr must start at 0 and end at nnz".into()));
        }
        for j in 0..n_cols {
            let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
            if lo > hi {
                return Err(Error::InvalidParameter(format!("col_ptr decreases at column {j}")));
            }
            let rows = &row_idx[lo..hi];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(format!("row indices of column {j} are not strictly increasing")));
            }
            if let Some(&r) = rows.last() {
                if r >= n_rows {
                    return Err(Error::InvalidParameter(format!("row index {r} out of bounds in column {j}")));
                }
            }
        }
        Ok(SparseMatrix { n_rows, n_cols, col_ptr, row_idx, vals, symmetric: false })
    }

    /// Assembles a matrix from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n_cols + 1];
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({i}, {j}) out of bounds for {n_rows}x{n_cols} matrix"
                )));
            }
            counts[j + 1] += 1;
        }
        for j in 0..n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[j]] = (i, v);
            next[j] += 1;
        }

        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        for j in 0..n_cols {
            let col = &mut entries[counts[j]..counts[j + 1]];
            col.sort_by_key(|&(i, _)| i);
            for &(i, v) in col.iter() {
                if row_idx.len() > col_ptr[j] && *row_idx.last().unwrap() == i {
                    *vals.last_mut().unwrap() += v;
                } else {
                    row_idx.push(i);
                    vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(SparseMatrix { n_rows, n_cols, col_ptr, row_idx, vals, symmetric: false })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            vals: diag.to_vec(),
            symmetric: true,
        }
    }

    /// Converts a dense matrix, keeping entries that are exactly nonzero.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        for j in 0..m.cols() {
            for (i, &v) in m.col(j).iter().enumerate() {
                if v != 0.0 {
                    row_idx.push(i);
                    vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SparseMatrix { n_rows: m.rows(), n_cols: m.cols(), col_ptr, row_idx, vals, symmetric: false }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Row indices and values stored in column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        rows.binary_search(&i).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> DenseVector {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> SparseMatrix {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        let mut t =
            SparseMatrix::from_triplets(self.n_cols, self.n_rows, &triplets).expect("transpose indices are in bounds");
        t.symmetric = self.symmetric;
        t
    }

    /// Whether the matrix has been declared (and validated) symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Validates symmetry within [`SYMMETRY_TOL`].
    pub fn check_symmetry(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.n_rows, found: self.n_cols });
        }
        for (i, j, v) in self.iter() {
            let diff = (self.get(j, i) - v).abs();
            if diff > SYMMETRY_TOL {
                return Err(Error::NotSymmetric { row: i, col: j, diff });
            }
        }
        Ok(())
    }

    /// Sets the symmetric flag after validating it.
    pub fn mark_symmetric(&mut self) -> Result<()> {
        self.check_symmetry()?;
        self.symmetric = true;
        Ok(())
    }

    /// Sets the symmetric flag without validation. Callers that construct
    /// matrices symmetric by construction use this to skip the O(nnz log) check.
    pub(crate) fn assume_symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn matvec(&self, x: &[f64]) -> Result<DenseVector> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: x.len() });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch { expected: self.n_rows, found: y.len() });
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &a) in rows.iter().zip(vals) {
                y[i] += a * xj;
            }
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self + alpha * other` over the merged sparsity pattern. The result is
    /// flagged symmetric when both operands are.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix) -> Result<SparseMatrix> {
        same_shape(self, other)?;
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        for j in 0..self.n_cols {
            merge_columns(self.col(j), other.col(j), |i, a, b| {
                row_idx.push(i);
                vals.push(a + alpha * b);
            });
            col_ptr.push(row_idx.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_ptr,
            row_idx,
            vals,
            symmetric: self.symmetric && other.symmetric,
        })
    }

    /// Returns `self + shift * I`.
    pub fn shift_diagonal(&self, shift: f64) -> Result<SparseMatrix> {
        let n = self.n_rows.min(self.n_cols);
        let mut eye = SparseMatrix::from_diagonal(&vec![1.0; n]);
        eye.n_rows = self.n_rows;
        eye.n_cols = self.n_cols;
        eye.col_ptr.resize(self.n_cols + 1, n);
        self.add_scaled(shift, &eye)
    }
}

fn same_shape(a: &SparseMatrix, b: &SparseMatrix) -> Result<()> {
    if a.n_rows != b.n_rows {
        return Err(Error::DimensionMismatch { expected: a.n_rows, found: b.n_rows });
    }
    if a.n_cols != b.n_cols {
        return Err(Error::DimensionMismatch { expected: a.n_cols, found: b.n_cols });
    }
    Ok(())
}

/// Walks two sorted sparse columns in lockstep, calling `f(row, a, b)` for every
/// row present in either (missing values are zero).
fn merge_columns((ra, va): (&[usize], &[f64]), (rb, vb): (&[usize], &[f64]), mut f: impl FnMut(usize, f64, f64)) {
    let (mut p, mut q) = (0, 0);
    while p < ra.len() || q < rb.len() {
        match (ra.get(p), rb.get(q)) {
            (Some(&i), Some(&k)) if i == k => {
                f(i, va[p], vb[q]);
                p += 1;
                q += 1;
            }
            (Some(&i), Some(&k)) if i < k => {
                f(i, va[p], 0.0);
                p += 1;
            }
            (Some(&i), None) => {
                f(i, va[p], 0.0);
                p += 1;
            }
            (_, Some(&k)) => {
                f(k, 0.0, vb[q]);
                q += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// `||A - B||_F`, computed by merging the two patterns column by column.
pub fn frobenius_diff(a: &SparseMatrix, b: &SparseMatrix) -> Result<f64> {
    same_shape(a, b)?;
    let mut sum = 0.0;
    for j in 0..a.n_cols {
        merge_columns(a.col(j), b.col(j), |_, x, y| {
            let d = x - y;
            sum += d * d;
        });
    }
    Ok(sum.sqrt())
}
