mod common;

use common::*;
use proptest::prelude::*;
use seqsolve::krylov::{cr_solve, cr_solve_traced, lanczos_step, minres_solve, LanczosState, SolveOptions};
use seqsolve::linops::{jacobi_precond, SparseMatrix};
use seqsolve::Error;

fn tight() -> SolveOptions {
    SolveOptions::with_tol(1e-12)
}

#[test]
fn cr_examples() {
    let (x, rep) = cr_solve(&SparseMatrix::identity(3), &[1.0, 2.0, 3.0], &[0.0; 3], &tight()).unwrap();
    assert_eq!((x, rep.iterations), (vec![1.0, 2.0, 3.0], 1));
    let (x, rep) = cr_solve(&SparseMatrix::from_diagonal(&[2.0, 3.0]), &[2.0, 3.0], &[0.0; 2], &tight()).unwrap();
    assert!(rel_err(&x, &[1.0, 1.0]) < 1e-12 && rep.iterations <= 2);
    let (x, rep) = cr_solve(&SparseMatrix::identity(2), &[0.0, 0.0], &[5.0, 5.0], &tight()).unwrap();
    assert_eq!((x, rep.iterations), (vec![0.0, 0.0], 0));
}

#[test]
fn cr_breaks_down_on_symmetric_indefinite_2x2() {
    let h = SparseMatrix::from_diagonal(&[1.0, -1.0]);
    let res = cr_solve(&h, &[1.0, 1.0], &[0.0; 2], &tight());
    assert!(matches!(res, Err(Error::CrBreakdown { iteration: 0, .. })));
    let run = algorithm1(&to_rows(&h), &[1.0, 1.0], &[0.0; 2], 1e-12, 10);
    assert_eq!(run.breakdown, Some(0));
}

#[test]
fn cr_trace_matches_literal_recurrence() {
    let mut r = rng(20);
    for _ in 0..5 {
        let m = random_conditioned(6, false, &mut r);
        let b = random_vec(6, &mut r);
        let (res, steps) = cr_solve_traced(&symmetric_from_rows(&m), &b, &[0.0; 6], &tight());
        res.unwrap();
        let run = algorithm1(&m, &b, &[0.0; 6], 1e-12, 6);
        assert_eq!(steps.len(), run.steps.len());
        for (s, o) in steps.iter().zip(&run.steps) {
            assert!((s.alpha - o.alpha).abs() <= 1e-10 * o.alpha.abs());
            assert!(rel_err(&s.x, &o.x) <= 1e-10);
        }
    }
}

#[test]
fn minres_examples() {
    let b = [3.0, -1.0, 2.0];
    let (x, rep) = minres_solve(&SparseMatrix::identity(3), &b, &[0.0; 3], &tight(), None).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(rel_err(&x, &b) < 1e-15);

    let d: Vec<f64> = (1..=10).map(f64::from).collect();
    let a = SparseMatrix::from_diagonal(&d);
    let ones = vec![1.0; 10];
    let (x, rep) = minres_solve(&a, &ones, &[0.0; 10], &SolveOptions::default(), None).unwrap();
    let want: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    assert!(rel_err(&x, &want) < 1e-8 && rep.iterations <= 10);

    let m = jacobi_precond(&a).unwrap();
    let (_, rep) = minres_solve(&a, &ones, &[0.0; 10], &SolveOptions::default(), Some(&m)).unwrap();
    assert_eq!(rep.iterations, 1);
}

#[test]
fn minres_solves_indefinite_system() {
    let h = SparseMatrix::from_diagonal(&[1.0, -1.0]);
    let (x, rep) = minres_solve(&h, &[1.0, 1.0], &[0.0; 2], &tight(), None).unwrap();
    assert!(rep.converged && rel_err(&x, &[1.0, -1.0]) < 1e-12);
}

#[test]
fn minres_matches_gaussian_elimination() {
    let mut r = rng(21);
    for k in 0..10 {
        let n = 10 + 3 * k;
        let m = random_conditioned(n, k % 2 == 0, &mut r);
        let b = random_vec(n, &mut r);
        let (x, rep) =
            minres_solve(&symmetric_from_rows(&m), &b, &vec![0.0; n], &SolveOptions::default(), None).unwrap();
        assert!(rep.converged);
        assert!(rel_err(&x, &gauss_solve(&m, &b)) < 1e-6);
    }
}

#[test]
fn lanczos_two_by_two() {
    let a = symmetric_from_rows(&vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
    let mut st = LanczosState::new(&[1.0, 0.0], false, None);
    lanczos_step(&a, &mut st, None);
    assert_eq!(st.alpha[0], 2.0);
    assert!((st.beta[0] - 1.0).abs() < 1e-15);
    lanczos_step(&a, &mut st, None);
    assert!((st.alpha[1] - 2.0).abs() < 1e-15);
    assert!(st.is_breakdown());
}

#[test]
fn lanczos_ritz_values_match_jacobi() {
    let mut r = rng(22);
    let m = random_sparse_symmetric(8, 0.5, &mut r);
    let a = symmetric_from_rows(&m);
    let mut st = LanczosState::new(&random_vec(8, &mut r), true, None);
    for _ in 0..8 {
        lanczos_step(&a, &mut st, None);
    }
    let n = st.steps();
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        t[i][i] = st.alpha[i];
        if i + 1 < n {
            t[i][i + 1] = st.beta[i];
            t[i + 1][i] = st.beta[i];
        }
    }
    let got = jacobi_eigenvalues(&t);
    let want = jacobi_eigenvalues(&m);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{g} vs {w}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minres_history_is_monotone(seed in 0u64..10_000, n in 3usize..30, indefinite: bool) {
        let mut r = rng(seed);
        let m = random_conditioned(n, indefinite, &mut r);
        let b = random_vec(n, &mut r);
        let (_, rep) = minres_solve(&symmetric_from_rows(&m), &b, &vec![0.0; n], &SolveOptions::default(), None).unwrap();
        for w in rep.relres_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert_eq!(rep.relres_history.len(), rep.iterations + 1);
    }

    #[test]
    fn minres_and_cr_agree_on_spd(seed in 0u64..10_000, n in 2usize..20) {
        let mut r = rng(seed);
        let m = random_conditioned(n, false, &mut r);
        let a = symmetric_from_rows(&m);
        let b = random_vec(n, &mut r);
        let (xm, _) = minres_solve(&a, &b, &vec![0.0; n], &SolveOptions::default(), None).unwrap();
        let (xc, _) = cr_solve(&a, &b, &vec![0.0; n], &SolveOptions { max_iter: Some(n + 2), ..Default::default() }).unwrap();
        prop_assert!(rel_err(&xm, &xc) < 1e-6);
    }
}
