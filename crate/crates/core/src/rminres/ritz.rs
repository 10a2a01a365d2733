use nalgebra::{DMatrix, SymmetricEigen};

use crate::krylov::LanczosState;
use crate::linops::vector::{dot, DenseVector};
use crate::linops::{orthonormalize, DenseMatrix, LinearOperator};

use super::space::RecycleSpace;

/// Singular values of the projected image below this fraction of the largest
/// one are treated as zero.
const PROJECTED_RANK_TOL: f64 = 1e-10;

/// Harmonic Ritz extraction over `span(W)` given `A W = Phi G` with `Phi`
/// orthonormal (in the inner product the solver works in).
///
/// Solves `W^T A W y = mu (A W)^T (A W) y`; `mu = 1/theta` for the harmonic
/// Ritz values `theta`, so the `k_out` pairs of largest `|mu|` are the ones
/// closest to zero. Returns the lifted directions paired with their images.
pub(crate) fn harmonic_extract(w: &[&[f64]], phi: &[&[f64]], g: &DenseMatrix, k_out: usize) -> RecycleSpace {
    let n = w.first().or(phi.first()).map_or(0, |v| v.len());
    let m = w.len();
    if k_out == 0 || m == 0 {
        return RecycleSpace::empty(n);
    }
    debug_assert_eq!((g.rows(), g.cols()), (phi.len(), m));

    // Phi^T W, then F = (Phi^T W)^T G = W^T A W.
    let phi_w = DMatrix::from_fn(phi.len(), m, |i, j| dot(phi[i], w[j]));
    let g_na = g.to_nalgebra();
    let f = phi_w.transpose() * &g_na;
    let f = (&f + f.transpose()) * 0.5;
    let k = g_na.transpose() * &g_na;
    let k = (&k + k.transpose()) * 0.5;

    // Whiten K on its numerically nonzero range: S = L^-1 F L^-T with L = V diag(sqrt(lambda)).
    let keig = SymmetricEigen::new(k);
    let lmax = keig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    if !(lmax > 0.0) {
        return RecycleSpace::empty(n);
    }
    let cut = (PROJECTED_RANK_TOL * lmax.sqrt()).powi(2);
    let kept: Vec<usize> = (0..m).filter(|&i| keig.eigenvalues[i] > cut).collect();
    let r = kept.len();
    let whiten = DMatrix::from_fn(m, r, |i, j| {
        let idx = kept[j];
        keig.eigenvectors[(i, idx)] / keig.eigenvalues[idx].sqrt()
    });
    let s = whiten.transpose() * &f * &whiten;
    let s = (&s + s.transpose()) * 0.5;
    let seig = SymmetricEigen::new(s);

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| seig.eigenvalues[b].abs().total_cmp(&seig.eigenvalues[a].abs()).then(a.cmp(&b)));
    let take = k_out.min(r);
    let sel = DMatrix::from_fn(r, take, |i, j| seig.eigenvectors[(i, order[j])]);
    let y = &whiten * sel;

    let gy = &g_na * &y;
    let combine = |basis: &[&[f64]], coeffs: &DMatrix<f64>| -> Vec<DenseVector> {
        (0..coeffs.ncols())
            .map(|j| {
                let mut out = vec![0.0; n];
                for (i, b) in basis.iter().enumerate() {
                    let s = coeffs[(i, j)];
                    if s != 0.0 {
                        out.iter_mut().zip(b.iter()).for_each(|(o, v)| *o += s * v);
                    }
                }
                out
            })
            .collect()
    };
    let u_new = combine(w, &y);
    let au_new = combine(phi, &gy);
    RecycleSpace::from_pairs(DenseMatrix::from_columns(n, &u_new), DenseMatrix::from_columns(n, &au_new))
}

/// Harmonic Ritz extraction of a recycle space from a Lanczos basis and an
/// optional previous recycle space.
///
/// The search space is `[U_in, basis]`, where only the first `lanczos.steps()`
/// columns of `basis` are used when the Lanczos run is shorter than the basis.
/// The `k_out` harmonic Ritz vectors with smallest-magnitude harmonic Ritz
/// values are returned as the new `U`, with `C = A U` orthonormalized.
/// Numerically dependent directions are dropped, so the result may hold
/// fewer than `k_out` vectors.
pub fn ritz_extract(
    basis: &DenseMatrix,
    lanczos: &LanczosState,
    recycle_in: Option<&RecycleSpace>,
    k_out: usize,
    a: &dyn LinearOperator,
) -> RecycleSpace {
    let n = a.dim();
    let k_cols = if lanczos.steps() > 0 { basis.cols().min(lanczos.steps()) } else { basis.cols() };
    let mut w: Vec<&[f64]> = Vec::new();
    if let Some(r) = recycle_in {
        w.extend(r.u().columns());
    }
    w.extend((0..k_cols).map(|j| basis.col(j)));
    if w.is_empty() || k_out == 0 {
        return RecycleSpace::empty(n);
    }
    let aw: Vec<DenseVector> = w.iter().map(|v| a.apply_vec(v)).collect();
    let qr = orthonormalize(&DenseMatrix::from_columns(n, &aw));
    let phi: Vec<&[f64]> = qr.q.columns().collect();
    harmonic_extract(&w, &phi, &qr.r, k_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::LanczosState;
    use crate::linops::SparseMatrix;

    fn unstarted(n: usize) -> LanczosState {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        LanczosState::new(&v, false, None)
    }

    #[test]
    fn picks_smallest_magnitude_eigenvector() {
        let a = SparseMatrix::from_diagonal(&[1.0, 10.0, 100.0]);
        let space = ritz_extract(&DenseMatrix::identity(3), &unstarted(3), None, 1, &a);
        assert_eq!(space.k(), 1);
        let u = space.u().col(0);
        let nrm = crate::linops::vector::norm2(u);
        assert!((u[0].abs() / nrm - 1.0).abs() < 1e-8);
        assert!(u[1].abs() / nrm < 1e-8 && u[2].abs() / nrm < 1e-8);
    }

    #[test]
    fn smallest_magnitude_with_mixed_signs() {
        let a = SparseMatrix::from_diagonal(&[-50.0, 0.5, 20.0, -3.0]);
        let space = ritz_extract(&DenseMatrix::identity(4), &unstarted(4), None, 2, &a);
        assert_eq!(space.k(), 2);
        for u in space.u().columns() {
            assert!(u[0].abs() < 1e-8 && u[2].abs() < 1e-8);
        }
    }

    #[test]
    fn zero_k_out_is_empty() {
        let a = SparseMatrix::identity(3);
        assert!(ritz_extract(&DenseMatrix::identity(3), &unstarted(3), None, 0, &a).is_empty());
    }

    #[test]
    fn degenerate_spectrum_keeps_invariants() {
        let a = SparseMatrix::from_diagonal(&[2.0, 2.0, 2.0]);
        let space = ritz_extract(&DenseMatrix::identity(3), &unstarted(3), None, 2, &a);
        assert_eq!(space.k(), 2);
        let check = space.verify(&a);
        assert!(check.orthonormality <= 1e-10 && check.pairing <= 1e-10);
    }
}
