//! Predictor-corrector continuation along the Pareto set of a bi-objective
//! problem.
//!
//! The predictor solves `H(x) v = grad f(x) beta` matrix-free, with `H` the
//! weighted Hessian at the current weights, and steps `x + h v`. The
//! corrector is gradient descent on the fixed-weight scalarization. Along a
//! trace the predictor systems form a sequence, and RMINRES carries its
//! recycle space from one predictor solve to the next.

mod model;

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{format_float, ComparisonRecord, SequenceSummary, DEFAULT_COND_ITERS};
use crate::krylov::{minres_solve, SolveOptions, SolveReport};
use crate::linops::vector::{axpy, dot, norm2, DenseVector};
use crate::linops::{cond_estimate, densify, frobenius_diff, SparseMatrix};
use crate::rminres::{rminres_solve, RecycleSpace, DEFAULT_RECYCLE_DIM};

pub use model::{fd_hessian_vec, weighted_gradient, BiQuadratic, HessianOperator, ObjectiveModel, QuarticRegularized};

/// Sufficient-decrease constant of the corrector line search.
pub const ARMIJO_C: f64 = 1e-4;

/// Relative level of `F` below which the sufficient-decrease test switches
/// to its derivative form.
pub const APPROX_ARMIJO_SLACK: f64 = 1e-10;

/// Largest model dimension for which trace diagnostics densify the Hessian.
pub const DIAGNOSTIC_MAX_DIM: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorSolver {
    Minres,
    Rminres,
}

impl fmt::Display for PredictorSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictorSolver::Minres => "minres",
            PredictorSolver::Rminres => "rminres",
        })
    }
}

impl FromStr for PredictorSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minres" => Ok(PredictorSolver::Minres),
            "rminres" => Ok(PredictorSolver::Rminres),
            _ => Err(Error::InvalidParameter(format!("predictor solver must be minres or rminres, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub x: DenseVector,
    pub w: [f64; 2],
    pub f: [f64; 2],
    /// `||w_1 grad f_1(x) + w_2 grad f_2(x)||`
    pub stationarity_norm: f64,
    /// Iterations of the predictor solve that led to this point (0 for the start).
    pub predictor_iters: usize,
    pub corrector_iters: usize,
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub steps: usize,
    /// Predictor step size.
    pub h: f64,
    pub solver: PredictorSolver,
    pub k_recycle: usize,
    pub solve: SolveOptions,
    pub corrector_tol: f64,
    pub corrector_max_iter: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            steps: 10,
            h: 1.0,
            solver: PredictorSolver::Rminres,
            k_recycle: DEFAULT_RECYCLE_DIM,
            solve: SolveOptions::default(),
            corrector_tol: 1e-8,
            corrector_max_iter: 10_000,
        }
    }
}

impl TraceOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {}", self.h)));
        }
        if !(self.corrector_tol > 0.0) {
            return Err(Error::InvalidParameter("corrector tolerance must be positive".into()));
        }
        self.solve.validate()
    }
}

fn scalarization<M: ObjectiveModel + ?Sized>(model: &M, x: &[f64], w: [f64; 2]) -> f64 {
    let f = model.values(x);
    w[0] * f[0] + w[1] * f[1]
}

fn accept<M: ObjectiveModel + ?Sized>(model: &M, x: DenseVector, w: [f64; 2], g: &[f64], iters: usize) -> ParetoPoint {
    ParetoPoint { f: model.values(&x), x, w, stationarity_norm: norm2(g), predictor_iters: 0, corrector_iters: iters }
}

/// Minimizes `w_1 f_1 + w_2 f_2` from `x_pred` by gradient descent with
/// halving backtracking until the weighted gradient norm is at most `tol`.
///
/// A trial step `t` is accepted when `F(x - t g) <= F(x) - c t ||g||^2`.
/// Once `t ||g||^2` falls below the rounding level of `F` the test switches
/// to `g(x - t g)^T g >= -(1 - 2c) ||g||^2`, which is equivalent for quadratics.
pub fn corrector_step<M: ObjectiveModel + ?Sized>(
    model: &M,
    x_pred: &[f64],
    w: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<ParetoPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("corrector tolerance must be positive".into()));
    }
    if x_pred.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x_pred.len() });
    }
    let mut x = x_pred.to_vec();
    let mut g = weighted_gradient(model, &x, w);
    for it in 0..max_iter {
        let gg = dot(&g, &g);
        if gg.sqrt() <= tol {
            return Ok(accept(model, x, w, &g, it));
        }
        let fx = scalarization(model, &x, w);
        let mut t = 1.0;
        let next = loop {
            let mut trial = x.clone();
            axpy(-t, &g, &mut trial);
            let ft = scalarization(model, &trial, w);
            let accepted = if t * gg > APPROX_ARMIJO_SLACK * fx.abs() {
                ft <= fx - ARMIJO_C * t * gg
            } else {
                // The predicted decrease is below the rounding level of F;
                // use the derivative form of the same condition.
                ft <= fx + APPROX_ARMIJO_SLACK * fx.abs()
                    && dot(&weighted_gradient(model, &trial, w), &g) >= -(1.0 - 2.0 * ARMIJO_C) * gg
            };
            if accepted {
                break Some(trial);
            }
            t *= 0.5;
            if t < 1e-30 {
                break None;
            }
        };
        match next {
            Some(trial) => x = trial,
            None => {
                return Err(Error::CorrectorFailed { iterations: it, grad_norm: gg.sqrt(), x });
            }
        }
        g = weighted_gradient(model, &x, w);
    }
    let grad_norm = norm2(&g);
    if grad_norm <= tol {
        return Ok(accept(model, x, w, &g, max_iter));
    }
    Err(Error::CorrectorFailed { iterations: max_iter, grad_norm, x })
}

fn predictor_rhs<M: ObjectiveModel + ?Sized>(model: &M, x: &[f64], beta: [f64; 2]) -> DenseVector {
    weighted_gradient(model, x, beta)
}

fn solve_predictor<M: ObjectiveModel + ?Sized>(
    model: &M,
    p: &ParetoPoint,
    rhs: &[f64],
    solver: PredictorSolver,
    recycle: Option<&RecycleSpace>,
    k_recycle: usize,
    opts: &SolveOptions,
) -> Result<(DenseVector, Option<RecycleSpace>, SolveReport)> {
    let h = HessianOperator::new(model, &p.x, p.w);
    let zeros = vec![0.0; model.dim()];
    match solver {
        PredictorSolver::Minres => {
            let (v, report) = minres_solve(&h, rhs, &zeros, opts, None)?;
            Ok((v, None, report))
        }
        PredictorSolver::Rminres => {
            let (v, report, space) = rminres_solve(&h, rhs, &zeros, opts, recycle, None, k_recycle)?;
            Ok((v, Some(space), report))
        }
    }
}

/// Solves `H(p.x) v = grad f(p.x) beta` with `H` weighted by `p.w` and
/// returns `p.x + h v`, the next recycle space (RMINRES only) and the solve report.
#[allow(clippy::too_many_arguments)]
pub fn predictor_step<M: ObjectiveModel + ?Sized>(
    model: &M,
    p: &ParetoPoint,
    beta: [f64; 2],
    h: f64,
    solver: PredictorSolver,
    recycle: Option<&RecycleSpace>,
    k_recycle: usize,
    opts: &SolveOptions,
) -> Result<(DenseVector, Option<RecycleSpace>, SolveReport)> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    let rhs = predictor_rhs(model, &p.x, beta);
    let (v, space, report) = solve_predictor(model, p, &rhs, solver, recycle, k_recycle, opts)?;
    if !report.converged {
        return Err(Error::NotConverged { report });
    }
    let mut x = p.x.clone();
    axpy(h, &v, &mut x);
    Ok((x, space, report))
}

/// The scalarization minimizer for `w = (1, 0)`, reached from `x = 0`.
pub fn start_point<M: ObjectiveModel + ?Sized>(model: &M, opts: &TraceOptions) -> Result<ParetoPoint> {
    corrector_step(model, &vec![0.0; model.dim()], [1.0, 0.0], opts.corrector_tol, opts.corrector_max_iter)
}

/// Result of [`trace_front`]. On failure `points` holds the accepted prefix
/// and `error` the cause.
#[derive(Debug)]
pub struct Trace {
    pub points: Vec<ParetoPoint>,
    /// One record per predictor solve: the MINRES column solves from scratch,
    /// the RMINRES column threads the recycle space, whichever solver drives the path.
    pub summary: SequenceSummary,
    pub error: Option<Error>,
}

fn hessian_matrix<M: ObjectiveModel + ?Sized>(model: &M, p: &ParetoPoint) -> Option<SparseMatrix> {
    (model.dim() <= DIAGNOSTIC_MAX_DIM)
        .then(|| SparseMatrix::from_dense(&densify(&HessianOperator::new(model, &p.x, p.w))))
}

/// Alternates predictor and corrector steps from `start`, moving the weights
/// linearly from `start.w` to `(0, 1)` in `steps` equal increments `dw`.
/// The predictor uses `beta = -dw`.
pub fn trace_front<M: ObjectiveModel + ?Sized>(model: &M, start: ParetoPoint, opts: &TraceOptions) -> Result<Trace> {
    opts.validate()?;
    if start.x.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: start.x.len() });
    }
    let s = opts.steps as f64;
    let w0 = start.w;
    let dw = [-w0[0] / s, (1.0 - w0[1]) / s];
    let beta = [-dw[0], -dw[1]];

    let mut points = vec![start];
    let mut records = Vec::with_capacity(opts.steps);
    let mut space: Option<RecycleSpace> = None;
    let mut prev_h: Option<SparseMatrix> = None;
    let mut error = None;

    for k in 0..opts.steps {
        let p = points.last().expect("trace is nonempty");
        let rhs = predictor_rhs(model, &p.x, beta);
        let minres = solve_predictor(model, p, &rhs, PredictorSolver::Minres, None, 0, &opts.solve);
        let rminres =
            solve_predictor(model, p, &rhs, PredictorSolver::Rminres, space.as_ref(), opts.k_recycle, &opts.solve);
        let ((v_m, _, rep_m), (v_r, next, rep_r)) = match (minres, rminres) {
            (Ok(m), Ok(r)) => (m, r),
            (Err(e), _) | (_, Err(e)) => {
                error = Some(e);
                break;
            }
        };
        space = next;

        let hk = hessian_matrix(model, p);
        let frob_diff_prev = match (&prev_h, &hk) {
            (Some(a), Some(b)) => Some(frobenius_diff(b, a)?),
            _ => None,
        };
        let cond_est = hk.as_ref().and_then(|m| cond_estimate(m, DEFAULT_COND_ITERS.min(m.n_rows())).ok());
        prev_h = hk;
        records.push(ComparisonRecord {
            k,
            minres_iters: rep_m.iterations,
            rminres_iters: rep_r.iterations,
            frob_diff_prev,
            cond_est,
            minres_relres: rep_m.final_relres,
            rminres_relres: rep_r.final_relres,
            minres_converged: rep_m.converged,
            rminres_converged: rep_r.converged,
        });

        let (v, report) = match opts.solver {
            PredictorSolver::Minres => (v_m, rep_m),
            PredictorSolver::Rminres => (v_r, rep_r),
        };
        if !report.converged {
            error = Some(Error::NotConverged { report });
            break;
        }
        let mut x_pred = p.x.clone();
        axpy(opts.h, &v, &mut x_pred);
        let t = (k + 1) as f64;
        let w = if k + 1 == opts.steps { [0.0, 1.0] } else { [w0[0] + t * dw[0], w0[1] + t * dw[1]] };
        match corrector_step(model, &x_pred, w, opts.corrector_tol, opts.corrector_max_iter) {
            Ok(mut q) => {
                q.predictor_iters = report.iterations;
                points.push(q);
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    Ok(Trace { points, summary: SequenceSummary::from_records(records), error })
}

/// Points CSV: `k, w1, w2, x_0 .. x_{n-1}, f1, f2, stationarity_norm, predictor_iters`.
pub fn render_points_csv(points: &[ParetoPoint]) -> String {
    let n = points.first().map_or(0, |p| p.x.len());
    let mut out = String::from("k,w1,w2");
    for i in 0..n {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",f1,f2,stationarity_norm,predictor_iters\n");
    for (k, p) in points.iter().enumerate() {
        let _ = write!(out, "{k},{},{}", format_float(p.w[0]), format_float(p.w[1]));
        for xi in &p.x {
            let _ = write!(out, ",{}", format_float(*xi));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            format_float(p.f[0]),
            format_float(p.f[1]),
            format_float(p.stationarity_norm),
            p.predictor_iters
        );
    }
    out
}

pub fn write_points_csv(points: &[ParetoPoint], path: &Path) -> Result<()> {
    std::fs::write(path, render_points_csv(points)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::model::{BiQuadratic, QuarticRegularized};

    #[test]
    fn corrector_reaches_weighted_minimizer() {
        let bq = BiQuadratic::standard(20, 7).unwrap();
        let p = corrector_step(&bq, &[0.0; 20], [0.5, 0.5], 1e-10, 10_000).unwrap();
        let half: DenseVector = bq.c().iter().map(|v| 0.5 * v).collect();
        let err = p.x.iter().zip(&half).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err:e}");
        assert!(p.stationarity_norm <= 1e-10);
    }

    #[test]
    fn corrector_reports_failure() {
        let qr = QuarticRegularized::standard(10, 1).unwrap();
        match corrector_step(&qr, &[5.0; 10], [0.5, 0.5], 1e-12, 2) {
            Err(Error::CorrectorFailed { iterations, .. }) => assert_eq!(iterations, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn biquad_predictor_is_exact() {
        let bq = BiQuadratic::standard(15, 2).unwrap();
        let opts = TraceOptions { steps: 5, ..Default::default() };
        let start = start_point(&bq, &opts).unwrap();
        let (x_pred, _, rep) =
            predictor_step(&bq, &start, [0.2, -0.2], 1.0, PredictorSolver::Minres, None, 0, &opts.solve).unwrap();
        assert!(rep.converged);
        let target: DenseVector = bq.c().iter().map(|v| 0.2 * v).collect();
        let err = x_pred.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn trace_follows_the_segment() {
        let bq = BiQuadratic::standard(30, 5).unwrap();
        let opts = TraceOptions { steps: 6, ..Default::default() };
        let start = start_point(&bq, &opts).unwrap();
        let trace = trace_front(&bq, start, &opts).unwrap();
        assert!(trace.error.is_none());
        assert_eq!(trace.points.len(), 7);
        assert_eq!(trace.points.last().unwrap().w, [0.0, 1.0]);
        assert_eq!(trace.summary.records.len(), 6);
        for p in &trace.points {
            assert!(bq.pareto_distance(&p.x).unwrap() < 1e-6);
        }
        for pair in trace.points.windows(2) {
            assert!(pair[1].f[0] >= pair[0].f[0] && pair[1].f[1] <= pair[0].f[1]);
        }
    }

    #[test]
    fn option_validation() {
        assert!(TraceOptions { steps: 0, ..Default::default() }.validate().is_err());
        assert!(TraceOptions { h: 0.0, ..Default::default() }.validate().is_err());
        assert!(TraceOptions::default().validate().is_ok());
        assert_eq!("minres".parse::<PredictorSolver>().unwrap(), PredictorSolver::Minres);
        assert!("cr".parse::<PredictorSolver>().is_err());
    }

    #[test]
    fn points_csv_shape() {
        let p = ParetoPoint {
            x: vec![1.0, 2.0],
            w: [1.0, 0.0],
            f: [0.5, 0.25],
            stationarity_norm: 0.0,
            predictor_iters: 3,
            corrector_iters: 1,
        };
        let csv = render_points_csv(&[p]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,w1,w2,x_0,x_1,f1,f2,stationarity_norm,predictor_iters");
        assert_eq!(lines.next().unwrap().split(',').count(), 9);
        assert!(lines.next().is_none());
    }
}
