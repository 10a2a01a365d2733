mod common;

use common::*;
use seqsolve::harness::{
    generate_sequence, load_matrix_market, render_csv, run_comparison, write_matrix_market, ComparisonOptions, Spectrum,
};
use seqsolve::linops::{cond_estimate, frobenius_diff};

#[test]
fn matrix_market_round_trip() {
    let mut r = rng(50);
    let a = symmetric_from_rows(&random_sparse_symmetric(20, 0.2, &mut r));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    write_matrix_market(&a, &path).unwrap();
    let back = load_matrix_market(&path).unwrap();
    assert!(frobenius_diff(&a, &back).unwrap() <= 1e-14);
    assert!(back.is_symmetric());
}

#[test]
fn drift_and_spectrum_diagnostics() {
    let seq = generate_sequence(100, 4, 1e-2, Spectrum::Ill(1e6), 7).unwrap();
    for k in 1..seq.len() {
        let d = frobenius_diff(seq.matrix(k), seq.matrix(k - 1)).unwrap();
        assert!((d - 1e-2).abs() <= 1e-12, "{:e} {}", d - 1e-2, seq.matrix(k).frobenius_norm());
    }
    let c = cond_estimate(seq.matrix(0), 100).unwrap();
    assert!((1e5..=1e7).contains(&c), "{c:e}");
}

#[test]
fn generated_spectrum_matches_jacobi_oracle() {
    let seq = generate_sequence(40, 1, 0.0, Spectrum::Ill(1e3), 3).unwrap();
    let ev = jacobi_eigenvalues(&to_rows(seq.matrix(0)));
    let mags: Vec<f64> = ev.iter().map(|v| v.abs()).collect();
    let ratio = mags.iter().cloned().fold(0.0, f64::max) / mags.iter().cloned().fold(f64::MAX, f64::min);
    assert!((ratio - 1e3).abs() <= 1e-6 * 1e3, "{ratio}");
}

#[test]
fn comparison_solutions_are_correct() {
    let seq = generate_sequence(40, 3, 1e-3, Spectrum::Indefinite, 4).unwrap();
    let s = run_comparison(&seq, &ComparisonOptions::default()).unwrap();
    assert_eq!(s.records.len(), 3);
    assert!(s.records.iter().all(|r| r.minres_converged && r.rminres_converged));
    assert!(s.records.iter().all(|r| r.minres_relres <= 1e-8 && r.rminres_relres <= 1e-8));
    assert!(s.records[1..].iter().all(|r| (r.frob_diff_prev.unwrap() - 1e-3).abs() <= 1e-12));
}

#[test]
fn comparison_is_reproducible() {
    let seq = generate_sequence(60, 4, 1e-4, Spectrum::Indefinite, 9).unwrap();
    let a = render_csv(&run_comparison(&seq, &ComparisonOptions::default()).unwrap());
    let seq2 = generate_sequence(60, 4, 1e-4, Spectrum::Indefinite, 9).unwrap();
    let b = render_csv(&run_comparison(&seq2, &ComparisonOptions::default()).unwrap());
    assert_eq!(a, b);
}
