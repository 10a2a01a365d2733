//! Dense reference routines shared by the integration and acceptance tests.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqsolve::linops::SparseMatrix;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_rows(a: &SparseMatrix) -> Dense {
    let mut m = vec![vec![0.0; a.n_cols()]; a.n_rows()];
    for (i, j, v) in a.iter() {
        m[i][j] += v;
    }
    m
}

pub fn from_rows(m: &Dense) -> SparseMatrix {
    let mut t = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(m.len(), m.first().map_or(0, Vec::len), &t).unwrap()
}

pub fn symmetric_from_rows(m: &Dense) -> SparseMatrix {
    let mut a = from_rows(m);
    a.mark_symmetric().unwrap();
    a
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                c[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    c
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn fro(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm(&d) / norm(y).max(f64::MIN_POSITIVE)
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Dense = a.iter().zip(b).map(|(row, &bi)| row.iter().copied().chain([bi]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        assert!(m[p][c].abs() > 1e-300, "singular matrix in oracle");
        m.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..=n {
                m[i][j] -= f * m[c][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Inverse by Gaussian elimination, column by column.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            gauss_solve(a, &e)
        })
        .collect();
    transpose(&cols)
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns the
/// eigenvalues in ascending order.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off.sqrt() <= 1e-14 * fro(&m).max(1.0) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lower Cholesky factor of an SPD matrix.
pub fn cholesky(a: &Dense) -> Dense {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[j][k] * l[j][k]).sum();
        let d = a[j][j] - s;
        assert!(d > 0.0, "matrix is not SPD");
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = (a[i][j] - s) / l[j][j];
        }
    }
    l
}

/// Random orthogonal matrix from Gram-Schmidt on Gaussian-like columns.
pub fn random_orthogonal(n: usize, r: &mut ChaCha8Rng) -> Dense {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for u in &q {
                let s = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= s * b);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            q.push(v.into_iter().map(|a| a / nv).collect());
        }
    }
    transpose(&q)
}

/// `Q diag(eigs) Q^T` with a random orthogonal `Q`.
pub fn with_spectrum(eigs: &[f64], r: &mut ChaCha8Rng) -> Dense {
    let n = eigs.len();
    let q = random_orthogonal(n, r);
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = (0..n).map(|k| q[i][k] * eigs[k] * q[j][k]).sum();
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    m
}

/// Random sparse symmetric matrix with the given density off the diagonal.
pub fn random_sparse_symmetric(n: usize, density: f64, r: &mut ChaCha8Rng) -> Dense {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = r.random_range(-3.0..3.0);
        for j in 0..i {
            if r.random_bool(density) {
                let v = r.random_range(-1.0..1.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
    }
    m
}

/// Random sparse diagonally dominant (hence invertible) matrix.
pub fn random_dominant(n: usize, density: f64, r: &mut ChaCha8Rng) -> Dense {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && r.random_bool(density) {
                m[i][j] = r.random_range(-1.0..1.0);
            }
        }
        let s: f64 = m[i].iter().map(|v: &f64| v.abs()).sum();
        m[i][i] = s + r.random_range(1.0..2.0);
    }
    m
}

pub fn random_vec(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

/// One iterate of the conjugate residual recurrence.
#[derive(Debug, Clone)]
pub struct CrLine {
    pub alpha: f64,
    pub beta: f64,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
}

/// Outcome of [`algorithm1`]: the iterates and, when the recurrence divides
/// by zero before convergence, the iteration at which it did.
pub struct CrRun {
    pub steps: Vec<CrLine>,
    pub breakdown: Option<usize>,
}

/// The conjugate residual recurrence executed literally on a dense matrix,
/// with `H p` recomputed by a matrix-vector product every iteration.
pub fn algorithm1(h: &Dense, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> CrRun {
    let bn = norm(b);
    let mut x = x0.to_vec();
    let hx = matvec(h, &x);
    let mut r: Vec<f64> = b.iter().zip(&hx).map(|(p, q)| p - q).collect();
    let mut p = r.clone();
    let mut steps = Vec::new();
    for i in 0..max_iter {
        if norm(&r) / bn <= tol {
            break;
        }
        let hr = matvec(h, &r);
        let hp = matvec(h, &p);
        let alpha = dot(&hr, &r) / dot(&hp, &hp);
        let x_next: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
        let r_next: Vec<f64> = r.iter().zip(&hp).map(|(a, b)| a - alpha * b).collect();
        let hr_next = matvec(h, &r_next);
        let beta = dot(&hr_next, &r_next) / dot(&hr, &r);
        if !beta.is_finite() && norm(&r_next) / bn > tol {
            return CrRun { steps, breakdown: Some(i) };
        }
        p = r_next.iter().zip(&p).map(|(a, b)| a + beta * b).collect();
        x = x_next;
        r = r_next;
        steps.push(CrLine { alpha, beta, x: x.clone(), r: r.clone() });
    }
    CrRun { steps, breakdown: None }
}

/// Symmetric matrix with eigenvalue magnitudes in `[0.5, 5]`; every other
/// eigenvalue is negated when `indefinite`.
pub fn random_conditioned(n: usize, indefinite: bool, r: &mut ChaCha8Rng) -> Dense {
    let eigs: Vec<f64> = (0..n)
        .map(|i| {
            let m = r.random_range(0.5..5.0);
            if indefinite && i % 2 == 1 {
                -m
            } else {
                m
            }
        })
        .collect();
    with_spectrum(&eigs, r)
}
