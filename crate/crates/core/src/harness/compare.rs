use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{minres_solve, SolveOptions};
use crate::linops::{cond_estimate, cond_exact, frobenius_diff};
use crate::rminres::{rminres_solve, RecycleSpace, DEFAULT_RECYCLE_DIM};

use super::SystemSequence;

/// Lanczos length used for condition estimates when none is given.
pub const DEFAULT_COND_ITERS: usize = 300;

#[derive(Debug, Clone)]
pub struct ComparisonOptions {
    pub solve: SolveOptions,
    pub k_recycle: usize,
    /// Lanczos steps for the condition estimate (`None`: `min(n, 300)`).
    pub cond_iters: Option<usize>,
    /// Use a dense eigendecomposition instead of the Lanczos estimate (n <= 500).
    pub exact_cond: bool,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        ComparisonOptions {
            solve: SolveOptions::default(),
            k_recycle: DEFAULT_RECYCLE_DIM,
            cond_iters: None,
            exact_cond: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub k: usize,
    pub minres_iters: usize,
    pub rminres_iters: usize,
    /// `||A_k - A_{k-1}||_F`, absent for the first system.
    pub frob_diff_prev: Option<f64>,
    /// Absent when the estimate reports a numerically singular matrix.
    pub cond_est: Option<f64>,
    pub minres_relres: f64,
    pub rminres_relres: f64,
    pub minres_converged: bool,
    pub rminres_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSummary {
    pub total_minres_iters: usize,
    pub total_rminres_iters: usize,
    /// `100 (1 - rminres_total / minres_total)`.
    pub reduction_percent: f64,
    /// Set when any solve in the sequence did not converge.
    pub partial: bool,
    pub records: Vec<ComparisonRecord>,
}

impl SequenceSummary {
    pub fn from_records(records: Vec<ComparisonRecord>) -> Self {
        let total_minres_iters = records.iter().map(|r| r.minres_iters).sum();
        let total_rminres_iters = records.iter().map(|r| r.rminres_iters).sum();
        let partial = records.iter().any(|r| !r.minres_converged || !r.rminres_converged);
        SequenceSummary {
            total_minres_iters,
            total_rminres_iters,
            reduction_percent: reduction_percent(total_minres_iters, total_rminres_iters),
            partial,
            records,
        }
    }
}

pub fn reduction_percent(minres_total: usize, rminres_total: usize) -> f64 {
    if minres_total == 0 {
        0.0
    } else {
        100.0 * (1.0 - rminres_total as f64 / minres_total as f64)
    }
}

struct Baseline {
    iters: usize,
    relres: f64,
    converged: bool,
    frob_diff_prev: Option<f64>,
    cond_est: Option<f64>,
}

/// Solves every system with MINRES from scratch and with RMINRES threading
/// the recycle space from system to system (both from `x0 = 0`).
///
/// The MINRES arm and the diagnostics are independent per system and run as
/// a parallel map; the RMINRES arm is sequential.
pub fn run_comparison(seq: &SystemSequence, opts: &ComparisonOptions) -> Result<SequenceSummary> {
    if seq.is_empty() {
        return Err(Error::InvalidParameter("empty sequence".into()));
    }
    opts.solve.validate()?;
    let n = seq.n();
    let zeros = vec![0.0; n];
    let cond_iters = opts.cond_iters.unwrap_or(DEFAULT_COND_ITERS).min(n);

    let baseline: Vec<Baseline> = (0..seq.len())
        .into_par_iter()
        .map(|k| {
            let a = seq.matrix(k);
            let (_, report) = minres_solve(a, seq.rhs(k), &zeros, &opts.solve, None)?;
            let frob_diff_prev = if k > 0 { Some(frobenius_diff(a, seq.matrix(k - 1))?) } else { None };
            let cond = if opts.exact_cond { cond_exact(a) } else { cond_estimate(a, cond_iters) };
            let cond_est = match cond {
                Ok(c) => Some(c),
                Err(Error::NumericallySingular { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(Baseline {
                iters: report.iterations,
                relres: report.final_relres,
                converged: report.converged,
                frob_diff_prev,
                cond_est,
            })
        })
        .collect::<Result<_>>()?;

    let mut space: Option<RecycleSpace> = None;
    let mut records = Vec::with_capacity(seq.len());
    for (k, base) in baseline.into_iter().enumerate() {
        let (_, report, next) =
            rminres_solve(seq.matrix(k), seq.rhs(k), &zeros, &opts.solve, space.as_ref(), None, opts.k_recycle)?;
        space = Some(next);
        records.push(ComparisonRecord {
            k,
            minres_iters: base.iters,
            rminres_iters: report.iterations,
            frob_diff_prev: base.frob_diff_prev,
            cond_est: base.cond_est,
            minres_relres: base.relres,
            rminres_relres: report.final_relres,
            minres_converged: base.converged,
            rminres_converged: report.converged,
        });
    }
    Ok(SequenceSummary::from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{generate_sequence, Spectrum};

    #[test]
    fn single_system_has_equal_totals() {
        let seq = generate_sequence(60, 1, 1e-4, Spectrum::Indefinite, 2).unwrap();
        let s = run_comparison(&seq, &ComparisonOptions::default()).unwrap();
        assert_eq!(s.total_minres_iters, s.total_rminres_iters);
        assert_eq!(s.reduction_percent, 0.0);
        assert_eq!(s.records[0].frob_diff_prev, None);
    }

    #[test]
    fn totals_are_sums() {
        let seq = generate_sequence(60, 4, 1e-4, Spectrum::Indefinite, 2).unwrap();
        let s = run_comparison(&seq, &ComparisonOptions::default()).unwrap();
        assert_eq!(s.total_minres_iters, s.records.iter().map(|r| r.minres_iters).sum::<usize>());
        assert_eq!(s.total_rminres_iters, s.records.iter().map(|r| r.rminres_iters).sum::<usize>());
        assert!(!s.partial);
        assert_eq!(s, run_comparison(&seq, &ComparisonOptions::default()).unwrap());
    }

    #[test]
    fn minres_arm_ignores_recycle_dimension() {
        let seq = generate_sequence(50, 3, 1e-3, Spectrum::Indefinite, 8).unwrap();
        let a = run_comparison(&seq, &ComparisonOptions { k_recycle: 2, ..Default::default() }).unwrap();
        let b = run_comparison(&seq, &ComparisonOptions { k_recycle: 12, ..Default::default() }).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!((x.minres_iters, x.minres_relres), (y.minres_iters, y.minres_relres));
        }
    }

    #[test]
    fn iteration_cap_marks_partial() {
        let seq = generate_sequence(50, 2, 1e-3, Spectrum::Indefinite, 8).unwrap();
        let opts =
            ComparisonOptions { solve: SolveOptions { max_iter: Some(2), ..Default::default() }, ..Default::default() };
        assert!(run_comparison(&seq, &opts).unwrap().partial);
    }

    #[test]
    fn reduction_formula() {
        assert_eq!(reduction_percent(828, 796), 100.0 * (1.0 - 796.0 / 828.0));
        assert_eq!(reduction_percent(0, 0), 0.0);
    }
}
