//! Sparse approximate maps: the pattern-constrained minimizer of
//! `||A_k N - A_0||_F` and the preconditioner update `P_k = N P_0`.
//!
//! The Frobenius objective separates by columns, so `N` is assembled from `n`
//! independent small least-squares problems. Column `j` uses the allowed rows
//! `S_j` as unknowns and the union `I_j` of the row supports of `A_k[:, S_j]`
//! and `A_0[:, j]` as equations; rows outside `I_j` contribute nothing.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linops::vector::DenseVector;
use crate::linops::{Preconditioner, SparseMatrix};

/// Relative singular-value cutoff for the local least-squares problems.
pub const LOCAL_RANK_TOL: f64 = 1e-12;

/// Maximum refinement passes per local least-squares solve.
const REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternStrategy {
    /// Sparsity of `A` plus the diagonal.
    PatternOfA,
    Diagonal,
    /// Entries with `|A_ij| >= tau * max_i |A_ij|` per column, plus the diagonal.
    Threshold(f64),
}

/// Allowed row indices per column of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    n: usize,
    cols: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Builds a pattern from explicit row sets (sorted and deduplicated here).
    /// Empty columns are allowed; they force zero columns in the map.
    pub fn new(n: usize, mut cols: Vec<Vec<usize>>) -> Result<Self> {
        if cols.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: cols.len() });
        }
        for (j, c) in cols.iter_mut().enumerate() {
            c.sort_unstable();
            c.dedup();
            if c.last().is_some_and(|&i| i >= n) {
                return Err(Error::InvalidParameter(format!("pattern column {j} has row index >= {n}")));
            }
        }
        Ok(SparsityPattern { n, cols })
    }

    /// Every row allowed in every column.
    pub fn full(n: usize) -> Self {
        SparsityPattern { n, cols: vec![(0..n).collect(); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.cols[j].binary_search(&i).is_ok()
    }
}

pub fn build_pattern(a: &SparseMatrix, strategy: PatternStrategy) -> Result<SparsityPattern> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.n_rows(), found: a.n_cols() });
    }
    let n = a.n_rows();
    if let PatternStrategy::Threshold(tau) = strategy {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter(format!("threshold tau must lie in (0, 1], got {tau}")));
        }
    }
    let cols = (0..n)
        .map(|j| {
            let (rows, vals) = a.col(j);
            let mut c: Vec<usize> = match strategy {
                PatternStrategy::Diagonal => Vec::new(),
                PatternStrategy::PatternOfA => rows.to_vec(),
                PatternStrategy::Threshold(tau) => {
                    let cmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    rows.iter().zip(vals).filter(|(_, v)| v.abs() >= tau * cmax).map(|(&i, _)| i).collect()
                }
            };
            if let Err(pos) = c.binary_search(&j) {
                c.insert(pos, j);
            }
            c
        })
        .collect();
    Ok(SparsityPattern { n, cols })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnFlag {
    /// The local least-squares matrix was rank deficient; the minimum-norm
    /// solution was used.
    RankDeficient,
    /// No allowed rows; the column of the map is zero.
    EmptyPattern,
}

/// The map `N` with `A_k N ~ A_0` and its attained residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SamMap {
    pub map: SparseMatrix,
    /// `||A_k N - A_0||_F`
    pub residual_fro: f64,
    pub pattern: SparsityPattern,
    pub column_residuals: Vec<f64>,
    pub flagged: Vec<(usize, ColumnFlag)>,
}

struct ColumnSolution {
    rows: Vec<usize>,
    vals: Vec<f64>,
    residual: f64,
    flag: Option<ColumnFlag>,
}

fn check_inputs(a_k: &SparseMatrix, a_0: &SparseMatrix, pattern: &SparsityPattern) -> Result<()> {
    let n = a_k.n_rows();
    for found in [a_k.n_cols(), a_0.n_rows(), a_0.n_cols(), pattern.n()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    Ok(())
}

/// Least-squares column `j`: `min || A_k[I, S] x - A_0[I, j] ||`.
fn solve_column(a_k: &SparseMatrix, a_0: &SparseMatrix, allowed: &[usize], j: usize) -> ColumnSolution {
    let (t_rows, t_vals) = a_0.col(j);
    if allowed.is_empty() {
        let residual = t_vals.iter().map(|v| v * v).sum::<f64>().sqrt();
        return ColumnSolution { rows: Vec::new(), vals: Vec::new(), residual, flag: Some(ColumnFlag::EmptyPattern) };
    }

    let mut support: Vec<usize> = t_rows.to_vec();
    for &s in allowed {
        support.extend_from_slice(a_k.col(s).0);
    }
    support.sort_unstable();
    support.dedup();

    let m = support.len();
    let mut g = DMatrix::<f64>::zeros(m, allowed.len());
    for (c, &s) in allowed.iter().enumerate() {
        let (rows, vals) = a_k.col(s);
        for (&i, &v) in rows.iter().zip(vals) {
            let r = support.binary_search(&i).expect("row is in the support");
            g[(r, c)] = v;
        }
    }
    let mut rhs = DVector::<f64>::zeros(m);
    for (&i, &v) in t_rows.iter().zip(t_vals) {
        rhs[support.binary_search(&i).expect("row is in the support")] = v;
    }

    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let eps = LOCAL_RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let mut x = if smax > 0.0 {
        svd.solve(&rhs, eps).expect("SVD computed with both factors")
    } else {
        DVector::zeros(allowed.len())
    };
    let mut residual = (&g * &x - &rhs).norm();
    // Iterative refinement: re-solve for the residual while it keeps shrinking.
    if smax > 0.0 {
        for _ in 0..REFINEMENT_STEPS {
            let r = &rhs - &g * &x;
            let trial = &x + svd.solve(&r, eps).expect("SVD computed with both factors");
            let trial_res = (&g * &trial - &rhs).norm();
            if !(trial_res < residual) {
                break;
            }
            x = trial;
            residual = trial_res;
        }
    }
    ColumnSolution {
        rows: allowed.to_vec(),
        vals: x.iter().copied().collect(),
        residual,
        flag: (rank < allowed.len()).then_some(ColumnFlag::RankDeficient),
    }
}

fn assemble(n: usize, pattern: &SparsityPattern, columns: Vec<ColumnSolution>) -> Result<SamMap> {
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    let mut column_residuals = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    for (j, c) in columns.into_iter().enumerate() {
        row_idx.extend(c.rows);
        vals.extend(c.vals);
        col_ptr.push(row_idx.len());
        column_residuals.push(c.residual);
        if let Some(f) = c.flag {
            flagged.push((j, f));
        }
    }
    let residual_fro = column_residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(SamMap {
        map: SparseMatrix::new(n, n, col_ptr, row_idx, vals)?,
        residual_fro,
        pattern: pattern.clone(),
        column_residuals,
        flagged,
    })
}

/// Computes the sparse approximate map, solving the column problems in parallel.
pub fn compute_sam(a_k: &SparseMatrix, a_0: &SparseMatrix, pattern: &SparsityPattern) -> Result<SamMap> {
    check_inputs(a_k, a_0, pattern)?;
    let n = a_k.n_rows();
    let columns: Vec<ColumnSolution> =
        (0..n).into_par_iter().map(|j| solve_column(a_k, a_0, pattern.col(j), j)).collect();
    assemble(n, pattern, columns)
}

/// Single-threaded [`compute_sam`]; produces a bitwise-identical map.
pub fn compute_sam_sequential(a_k: &SparseMatrix, a_0: &SparseMatrix, pattern: &SparsityPattern) -> Result<SamMap> {
    check_inputs(a_k, a_0, pattern)?;
    let n = a_k.n_rows();
    let columns = (0..n).map(|j| solve_column(a_k, a_0, pattern.col(j), j)).collect();
    assemble(n, pattern, columns)
}

/// `P_k^{-1} v = N (P_0^{-1} v)`.
#[derive(Debug, Clone)]
pub struct SamPreconditioner<P> {
    map: SparseMatrix,
    seed: P,
}

impl<P: Preconditioner> SamPreconditioner<P> {
    pub fn map(&self) -> &SparseMatrix {
        &self.map
    }

    pub fn seed(&self) -> &P {
        &self.seed
    }
}

impl<P: Preconditioner> Preconditioner for SamPreconditioner<P> {
    fn dim(&self) -> usize {
        self.map.n_rows()
    }

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]) {
        let t: DenseVector = self.seed.apply_inverse_vec(v);
        self.map.matvec_into(&t, z).expect("dimensions checked at construction");
    }

    fn description(&self) -> String {
        format!("sam({})", self.seed.description())
    }
}

/// Composes the map after the seed preconditioner: `P_k = N P_0`.
pub fn sam_precondition<P: Preconditioner>(map: &SamMap, seed: P) -> Result<SamPreconditioner<P>> {
    if seed.dim() != map.map.n_rows() {
        return Err(Error::DimensionMismatch { expected: map.map.n_rows(), found: seed.dim() });
    }
    Ok(SamPreconditioner { map: map.map.clone(), seed })
}
