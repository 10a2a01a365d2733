//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage, parse, input or parameter errors,
//! 2 when a solve (or corrector) fails numerically or does not converge.

mod gen;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::harness::{
    emit_report, emit_sam_report, format_float, load_directory, load_manifest, load_matrix_market, load_vector,
    run_comparison, run_sam_eval, ComparisonOptions, Provenance, ReportFormat, SamEvalOptions, SamTarget, SeedPrecond,
    SystemSequence,
};
use crate::krylov::{cr_solve, minres_solve, SolveOptions, SolveReport};
use crate::linops::{ic0, jacobi_precond, Preconditioner, SparseMatrix};
use crate::pareto::{
    start_point, trace_front, write_points_csv, BiQuadratic, ObjectiveModel, PredictorSolver, QuarticRegularized,
    TraceOptions,
};
use crate::rminres::{rminres_solve, DEFAULT_RECYCLE_DIM};
use crate::sam::PatternStrategy;

pub use gen::GenSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

const FLAG_SUMMARY: &str = "\
Flags by subcommand:
  solve   --matrix --rhs --solver --tol --max-iter --recycle-dim --precond --out --format
  compare --matrix --rhs --manifest --gen --tol --max-iter --recycle-dim --seed --out --format --exact-cond
  sam     --matrix --rhs --manifest --gen --pattern --tau --precond --target --tol --max-iter --seed --out --format
  pareto  --model --dim --steps --step-size --solver --recycle-dim --tol --max-iter --seed --out --format --points-out

Randomness: every generator is ChaCha8 seeded from --seed (or seed= inside --gen).
Exit codes: 0 success, 1 usage or input error, 2 numerical failure or nonconvergence.";

#[derive(Debug, Parser)]
#[command(name = "seqsolve", version, about = "Recycling Krylov solvers for sequences of symmetric systems")]
#[command(after_help = FLAG_SUMMARY)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system.
    Solve(SolveCmd),
    /// MINRES vs RMINRES over a sequence, with per-system diagnostics.
    Compare(CompareCmd),
    /// Sparse approximate maps toward a reference system.
    Sam(SamCmd),
    /// Trace a Pareto front by predictor-corrector continuation.
    Pareto(ParetoCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Minres,
    Cr,
    Rminres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecondArg {
    None,
    Jacobi,
    Ic0,
    Sam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    /// Sparsity of each A_k plus the diagonal.
    A,
    Diag,
    /// Entries with |a_ij| >= tau max_i |a_ij|, plus the diagonal.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    First,
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Biquad,
    Quartic,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Iteration cap (default: the system dimension).
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Matrix Market file (a one-system sequence).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Right-hand side for --matrix (default: ones).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Manifest file (one matrix path per line, optional rhs path after it) or a directory of .mtx files.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Synthetic sequence: n=,m=,eps=,seed=,spectrum={indefinite|spd|ill},kappa=
    #[arg(long = "gen", value_name = "K=V,...")]
    pub generator: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveCmd {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolverArg::Minres)]
    pub solver: SolverArg,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Recycle dimension extracted by rminres.
    #[arg(long, default_value_t = DEFAULT_RECYCLE_DIM)]
    pub recycle_dim: usize,
    #[arg(long, value_enum, default_value_t = PrecondArg::None)]
    pub precond: PrecondArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = DEFAULT_RECYCLE_DIM)]
    pub recycle_dim: usize,
    /// Seed for --gen when it carries no seed= entry.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Dense eigendecomposition for condition numbers (n <= 500).
    #[arg(long)]
    pub exact_cond: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SamCmd {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = PatternArg::A)]
    pub pattern: PatternArg,
    /// Threshold for --pattern threshold, in (0, 1].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Seed preconditioner P_0 built from A_0.
    #[arg(long, value_enum, default_value_t = PrecondArg::None)]
    pub precond: PrecondArg,
    #[arg(long, value_enum, default_value_t = TargetArg::First)]
    pub target: TargetArg,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ParetoCmd {
    #[arg(long, value_enum, default_value_t = ModelArg::Biquad)]
    pub model: ModelArg,
    /// Model dimension.
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Predictor step size h.
    #[arg(long, default_value_t = 1.0)]
    pub step_size: f64,
    #[arg(long, value_enum, default_value_t = SolverArg::Rminres)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = DEFAULT_RECYCLE_DIM)]
    pub recycle_dim: usize,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Seed for the model data.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Points CSV: k, w1, w2, x_0.., f1, f2, stationarity_norm, predictor_iters.
    #[arg(long)]
    pub points_out: Option<PathBuf>,
}

enum Outcome {
    Success,
    NotConverged,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_)
        | Error::Parse { .. }
        | Error::Io { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotSymmetric { .. } => EXIT_USAGE,
        _ => EXIT_NOT_CONVERGED,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(c) => cmd_solve(c, out),
        Command::Compare(c) => cmd_compare(c, out),
        Command::Sam(c) => cmd_sam(c, out, err),
        Command::Pareto(c) => cmd_pareto(c, out, err),
    };
    match result {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::NotConverged) => EXIT_NOT_CONVERGED,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn solve_options(a: &SolveArgs) -> Result<SolveOptions> {
    let opts = SolveOptions { tol: a.tol, max_iter: a.max_iter, ..Default::default() };
    opts.validate()?;
    Ok(opts)
}

fn report_format(f: FormatArg) -> ReportFormat {
    match f {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    }
}

fn load_symmetric(path: &Path) -> Result<SparseMatrix> {
    let mut a = load_matrix_market(path)?;
    if !a.is_square() {
        return Err(Error::InvalidParameter(format!(
            "{}: matrix is {}x{}, expected square",
            path.display(),
            a.n_rows(),
            a.n_cols()
        )));
    }
    if !a.is_symmetric() {
        a.mark_symmetric()?;
    }
    Ok(a)
}

fn load_rhs(path: Option<&Path>, n: usize) -> Result<Vec<f64>> {
    match path {
        Some(p) => {
            let b = load_vector(p)?;
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.len() });
            }
            Ok(b)
        }
        None => Ok(vec![1.0; n]),
    }
}

fn seed_preconditioner(kind: PrecondArg, a: &SparseMatrix) -> Result<Option<Box<dyn Preconditioner>>> {
    Ok(match kind {
        PrecondArg::None => None,
        PrecondArg::Jacobi => Some(Box::new(jacobi_precond(a)?)),
        PrecondArg::Ic0 => Some(Box::new(ic0(a)?)),
        PrecondArg::Sam => {
            return Err(Error::InvalidParameter("sam preconditioning needs a sequence; use the sam subcommand".into()))
        }
    })
}

/// Resolves exactly one input source into a sequence.
fn resolve_input(input: &InputArgs, seed: u64) -> Result<SystemSequence> {
    let given = [input.matrix.is_some(), input.manifest.is_some(), input.generator.is_some()];
    match given.iter().filter(|&&g| g).count() {
        1 => {}
        0 => return Err(Error::InvalidParameter("one of --matrix, --manifest or --gen is required".into())),
        _ => return Err(Error::InvalidParameter("--matrix, --manifest and --gen are mutually exclusive".into())),
    }
    if input.rhs.is_some() && input.matrix.is_none() {
        return Err(Error::InvalidParameter("--rhs applies only to --matrix".into()));
    }
    if let Some(path) = &input.matrix {
        let a = load_symmetric(path)?;
        let b = load_rhs(input.rhs.as_deref(), a.n_rows())?;
        return SystemSequence::new(vec![(a, b)], Provenance::Files(vec![path.clone()]));
    }
    if let Some(path) = &input.manifest {
        return if path.is_dir() { load_directory(path) } else { load_manifest(path) };
    }
    let spec: GenSpec = input.generator.as_deref().unwrap_or_default().parse()?;
    spec.generate(seed)
}

fn write_solve_report(report: &SolveReport, output: &OutputArgs) -> Result<()> {
    let Some(path) = &output.out else { return Ok(()) };
    let text = match output.format {
        FormatArg::Csv => {
            let mut s = String::from("k,relres\n");
            for (k, r) in report.relres_history.iter().enumerate() {
                s.push_str(&format!("{k},{}\n", format_float(*r)));
            }
            s
        }
        FormatArg::Json => serde_json::to_string_pretty(report).expect("report serialization cannot fail") + "\n",
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_solve(c: &SolveCmd, out: &mut dyn Write) -> Result<Outcome> {
    let opts = solve_options(&c.solve)?;
    if c.solver == SolverArg::Cr && c.precond != PrecondArg::None {
        return Err(Error::InvalidParameter("cr does not take a preconditioner".into()));
    }
    if c.precond == PrecondArg::Sam {
        seed_preconditioner(c.precond, &SparseMatrix::identity(1))?;
    }
    let a = load_symmetric(&c.matrix)?;
    let n = a.n_rows();
    let b = load_rhs(c.rhs.as_deref(), n)?;
    let m = seed_preconditioner(c.precond, &a)?;
    let x0 = vec![0.0; n];
    let report = match c.solver {
        SolverArg::Minres => minres_solve(&a, &b, &x0, &opts, m.as_deref())?.1,
        SolverArg::Cr => cr_solve(&a, &b, &x0, &opts)?.1,
        SolverArg::Rminres => rminres_solve(&a, &b, &x0, &opts, None, m.as_deref(), c.recycle_dim)?.1,
    };
    let _ = writeln!(out, "iterations={}", report.iterations);
    let _ = writeln!(out, "relres={}", format_float(report.final_relres));
    let _ = writeln!(out, "converged={}", report.converged);
    write_solve_report(&report, &c.output)?;
    Ok(if report.converged { Outcome::Success } else { Outcome::NotConverged })
}

fn cmd_compare(c: &CompareCmd, out: &mut dyn Write) -> Result<Outcome> {
    let opts = ComparisonOptions {
        solve: solve_options(&c.solve)?,
        k_recycle: c.recycle_dim,
        cond_iters: None,
        exact_cond: c.exact_cond,
    };
    let seq = resolve_input(&c.input, c.seed)?;
    let summary = run_comparison(&seq, &opts)?;
    if let Some(path) = &c.output.out {
        emit_report(&summary, report_format(c.output.format), path)?;
    }
    let _ = writeln!(out, "systems={}", summary.records.len());
    let _ = writeln!(out, "total_minres_iters={}", summary.total_minres_iters);
    let _ = writeln!(out, "total_rminres_iters={}", summary.total_rminres_iters);
    let _ = writeln!(out, "reduction_percent={:.4}", summary.reduction_percent);
    if summary.partial {
        let _ = writeln!(out, "partial=true");
        return Ok(Outcome::NotConverged);
    }
    Ok(Outcome::Success)
}

fn cmd_sam(c: &SamCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let pattern = match (c.pattern, c.tau) {
        (PatternArg::Threshold, Some(tau)) => {
            if !(tau > 0.0 && tau <= 1.0) {
                return Err(Error::InvalidParameter(format!("--tau must lie in (0, 1], got {tau}")));
            }
            PatternStrategy::Threshold(tau)
        }
        (PatternArg::Threshold, None) => {
            return Err(Error::InvalidParameter("--pattern threshold requires --tau".into()))
        }
        (_, Some(_)) => return Err(Error::InvalidParameter("--tau applies only to --pattern threshold".into())),
        (PatternArg::A, None) => PatternStrategy::PatternOfA,
        (PatternArg::Diag, None) => PatternStrategy::Diagonal,
    };
    let seed_precond = match c.precond {
        PrecondArg::None => SeedPrecond::None,
        PrecondArg::Jacobi => SeedPrecond::Jacobi,
        PrecondArg::Ic0 => SeedPrecond::Ic0,
        PrecondArg::Sam => {
            return Err(Error::InvalidParameter("--precond for sam selects the seed: none, jacobi or ic0".into()))
        }
    };
    let target = match c.target {
        TargetArg::First => SamTarget::First,
        TargetArg::Previous => SamTarget::Previous,
    };
    let opts = SamEvalOptions { pattern, seed_precond, target, solve: solve_options(&c.solve)? };
    let seq = resolve_input(&c.input, c.seed)?;
    let report = run_sam_eval(&seq, &opts)?;
    if let Some(path) = &c.output.out {
        emit_sam_report(&report, report_format(c.output.format), path)?;
    }
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    for r in &report.records {
        let _ = write!(out, "k={} residual_fro={} map_nnz={}", r.k, format_float(r.residual_fro), r.map_nnz);
        if let (Some(s), Some(m)) = (r.seed_iters, r.sam_iters) {
            let _ = write!(out, " seed_iters={s} sam_iters={m}");
        }
        let _ = writeln!(out);
    }
    Ok(Outcome::Success)
}

fn cmd_pareto(c: &ParetoCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let solver = match c.solver {
        SolverArg::Minres => PredictorSolver::Minres,
        SolverArg::Rminres => PredictorSolver::Rminres,
        SolverArg::Cr => {
            return Err(Error::InvalidParameter("pareto predictor solver must be minres or rminres".into()))
        }
    };
    let opts = TraceOptions {
        steps: c.steps,
        h: c.step_size,
        solver,
        k_recycle: c.recycle_dim,
        solve: solve_options(&c.solve)?,
        ..Default::default()
    };
    opts.validate()?;
    if c.dim < 1 {
        return Err(Error::InvalidParameter("--dim must be at least 1".into()));
    }
    let model: Box<dyn ObjectiveModel> = match c.model {
        ModelArg::Biquad => Box::new(BiQuadratic::standard(c.dim, c.seed)?),
        ModelArg::Quartic => Box::new(QuarticRegularized::standard(c.dim, c.seed)?),
    };
    let start = start_point(model.as_ref(), &opts)?;
    let trace = trace_front(model.as_ref(), start, &opts)?;
    if let Some(path) = &c.output.out {
        emit_report(&trace.summary, report_format(c.output.format), path)?;
    }
    if let Some(path) = &c.points_out {
        write_points_csv(&trace.points, path)?;
    }
    let max_stat = trace.points.iter().map(|p| p.stationarity_norm).fold(0.0, f64::max);
    let predictor_total: usize = trace.points.iter().map(|p| p.predictor_iters).sum();
    let _ = writeln!(out, "model={}", model.name());
    let _ = writeln!(out, "points={}", trace.points.len());
    let _ = writeln!(out, "max_stationarity={}", format_float(max_stat));
    let _ = writeln!(out, "predictor_iters={predictor_total}");
    let _ = writeln!(out, "total_minres_iters={}", trace.summary.total_minres_iters);
    let _ = writeln!(out, "total_rminres_iters={}", trace.summary.total_rminres_iters);
    match trace.error {
        None => Ok(Outcome::Success),
        Some(e) => {
            let _ = writeln!(err, "error: trace stopped after {} points: {e}", trace.points.len());
            if exit_code(&e) == EXIT_USAGE {
                return Err(e);
            }
            Ok(Outcome::NotConverged)
        }
    }
}
