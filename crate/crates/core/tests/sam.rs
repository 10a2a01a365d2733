#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use seqsolve::linops::{IdentityPreconditioner, Preconditioner, SparseMatrix};
use seqsolve::sam::{
    build_pattern, compute_sam, compute_sam_sequential, sam_precondition, PatternStrategy, SparsityPattern,
};

fn residual(a_k: &Dense, n_map: &Dense, a_0: &Dense) -> f64 {
    fro(&sub(&matmul(a_k, n_map), a_0))
}

#[test]
fn pattern_examples() {
    let diag = build_pattern(&SparseMatrix::identity(3), PatternStrategy::Diagonal).unwrap();
    assert!((0..3).all(|j| diag.col(j) == [j]));
    let tri = symmetric_from_rows(&vec![
        vec![2.0, -1.0, 0.0, 0.0],
        vec![-1.0, 2.0, -1.0, 0.0],
        vec![0.0, -1.0, 2.0, -1.0],
        vec![0.0, 0.0, -1.0, 2.0],
    ]);
    let p = build_pattern(&tri, PatternStrategy::PatternOfA).unwrap();
    let sizes: Vec<usize> = (0..4).map(|j| p.col(j).len()).collect();
    assert_eq!(sizes, vec![2, 3, 3, 2]);
    let a = from_rows(&vec![vec![1.0, 0.0, 0.0], vec![0.4, 1.0, 0.0], vec![0.6, 0.0, 1.0]]);
    assert_eq!(build_pattern(&a, PatternStrategy::Threshold(0.5)).unwrap().col(0), &[0, 2]);
    assert!(build_pattern(&a, PatternStrategy::Threshold(0.0)).is_err());
}

#[test]
fn diagonal_scaling_example() {
    let a_k = SparseMatrix::from_diagonal(&[2.0, 4.0]);
    let a_0 = SparseMatrix::from_diagonal(&[1.0, 2.0]);
    let p = build_pattern(&a_k, PatternStrategy::Diagonal).unwrap();
    let m = compute_sam(&a_k, &a_0, &p).unwrap();
    assert_eq!(to_rows(&m.map), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
    assert_eq!(m.residual_fro, 0.0);
}

#[test]
fn full_pattern_recovers_inverse_product() {
    let mut r = rng(40);
    for _ in 0..5 {
        let a_k = random_dominant(6, 0.4, &mut r);
        let a_0 = random_dominant(6, 0.4, &mut r);
        let m = compute_sam(&from_rows(&a_k), &from_rows(&a_0), &SparsityPattern::full(6)).unwrap();
        let want = matmul(&inverse(&a_k), &a_0);
        assert!(fro(&sub(&to_rows(&m.map), &want)) <= 1e-10 * fro(&want));
        assert!(m.residual_fro <= 1e-10);
    }
}

#[test]
fn reported_residual_matches_dense_oracle() {
    let mut r = rng(41);
    let a_k = random_dominant(15, 0.2, &mut r);
    let a_0 = random_dominant(15, 0.2, &mut r);
    let sk = from_rows(&a_k);
    let p = build_pattern(&sk, PatternStrategy::PatternOfA).unwrap();
    let m = compute_sam(&sk, &from_rows(&a_0), &p).unwrap();
    let want = residual(&a_k, &to_rows(&m.map), &a_0);
    assert!((m.residual_fro - want).abs() <= 1e-12 * want.max(1.0));
    for (i, j, _) in m.map.iter() {
        assert!(p.contains(i, j));
    }
}

#[test]
fn rank_deficient_and_empty_columns_are_flagged() {
    let a_k = from_rows(&vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    let p = SparsityPattern::new(3, vec![vec![0, 1], vec![], vec![2]]).unwrap();
    let m = compute_sam(&a_k, &SparseMatrix::identity(3), &p).unwrap();
    use seqsolve::sam::ColumnFlag;
    assert!(m.flagged.contains(&(0, ColumnFlag::RankDeficient)));
    assert!(m.flagged.contains(&(1, ColumnFlag::EmptyPattern)));
    let n = to_rows(&m.map);
    assert!((n[0][0] - n[1][0]).abs() < 1e-14);
}

#[test]
fn preconditioner_composition() {
    let n = SparseMatrix::from_diagonal(&[0.5]);
    let m = compute_sam(&SparseMatrix::from_diagonal(&[2.0]), &SparseMatrix::identity(1), &SparsityPattern::full(1))
        .unwrap();
    assert_eq!(to_rows(&m.map), to_rows(&n));
    let p = sam_precondition(&m, IdentityPreconditioner::new(1)).unwrap();
    assert_eq!(p.apply_inverse_vec(&[4.0]), vec![2.0]);
    assert!(sam_precondition(&m, IdentityPreconditioner::new(2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn no_perturbation_beats_the_map(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let a_k = random_dominant(10, 0.3, &mut r);
        let a_0 = random_dominant(10, 0.3, &mut r);
        let sk = from_rows(&a_k);
        let p = build_pattern(&sk, PatternStrategy::PatternOfA).unwrap();
        let m = compute_sam(&sk, &from_rows(&a_0), &p).unwrap();
        let base = to_rows(&m.map);
        for _ in 0..10 {
            let mut q = base.clone();
            for j in 0..10 {
                for &i in p.col(j) {
                    q[i][j] += r.random_range(-1e-3..1e-3);
                }
            }
            prop_assert!(residual(&a_k, &q, &a_0) >= m.residual_fro - 1e-10);
        }
    }

    #[test]
    fn parallel_equals_sequential(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let sk = from_rows(&random_dominant(25, 0.2, &mut r));
        let s0 = from_rows(&random_dominant(25, 0.2, &mut r));
        let p = build_pattern(&sk, PatternStrategy::PatternOfA).unwrap();
        prop_assert_eq!(compute_sam(&sk, &s0, &p).unwrap(), compute_sam_sequential(&sk, &s0, &p).unwrap());
    }
}
