use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

use super::compare::SequenceSummary;
use super::sam_eval::SamReport;

/// Column order of the comparison CSV.
pub const COMPARISON_COLUMNS: [&str; 7] =
    ["k", "minres_iters", "rminres_iters", "frob_diff_prev", "cond_est", "minres_relres", "rminres_relres"];

pub const SAM_COLUMNS: [&str; 6] = ["k", "residual_fro", "map_nnz", "flagged_columns", "seed_iters", "sam_iters"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidParameter(format!("unknown report format '{s}'"))),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_float_cell(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Float serialized as a raw JSON number with 17 significant digits;
/// non-finite values become `null`.
struct F17(f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize)]
struct JsonRecord {
    k: usize,
    minres_iters: usize,
    rminres_iters: usize,
    frob_diff_prev: Option<F17>,
    cond_est: Option<F17>,
    minres_relres: F17,
    rminres_relres: F17,
    minres_converged: bool,
    rminres_converged: bool,
}

#[derive(Serialize)]
struct JsonSummary {
    total_minres_iters: usize,
    total_rminres_iters: usize,
    reduction_percent: F17,
    partial: bool,
    records: Vec<JsonRecord>,
}

#[derive(Serialize)]
struct JsonSamRecord {
    k: usize,
    residual_fro: F17,
    map_nnz: usize,
    flagged_columns: usize,
    seed_iters: Option<usize>,
    sam_iters: Option<usize>,
}

#[derive(Serialize)]
struct JsonSamReport<'a> {
    target: crate::harness::SamTarget,
    seed_precond: crate::harness::SeedPrecond,
    warnings: &'a [String],
    records: Vec<JsonSamRecord>,
}

pub fn render_csv(summary: &SequenceSummary) -> String {
    let mut out = COMPARISON_COLUMNS.join(",");
    out.push('\n');
    for r in &summary.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            r.minres_iters,
            r.rminres_iters,
            opt_float_cell(r.frob_diff_prev),
            opt_float_cell(r.cond_est),
            format_float(r.minres_relres),
            format_float(r.rminres_relres),
        );
    }
    out
}

pub fn render_json(summary: &SequenceSummary) -> String {
    let doc = JsonSummary {
        total_minres_iters: summary.total_minres_iters,
        total_rminres_iters: summary.total_rminres_iters,
        reduction_percent: F17(summary.reduction_percent),
        partial: summary.partial,
        records: summary
            .records
            .iter()
            .map(|r| JsonRecord {
                k: r.k,
                minres_iters: r.minres_iters,
                rminres_iters: r.rminres_iters,
                frob_diff_prev: r.frob_diff_prev.map(F17),
                cond_est: r.cond_est.map(F17),
                minres_relres: F17(r.minres_relres),
                rminres_relres: F17(r.rminres_relres),
                minres_converged: r.minres_converged,
                rminres_converged: r.rminres_converged,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn render_sam_csv(report: &SamReport) -> String {
    let mut out = SAM_COLUMNS.join(",");
    out.push('\n');
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            format_float(r.residual_fro),
            r.map_nnz,
            r.flagged_columns,
            opt_cell(r.seed_iters),
            opt_cell(r.sam_iters),
        );
    }
    out
}

pub fn render_sam_json(report: &SamReport) -> String {
    let doc = JsonSamReport {
        target: report.target,
        seed_precond: report.seed_precond,
        warnings: &report.warnings,
        records: report
            .records
            .iter()
            .map(|r| JsonSamRecord {
                k: r.k,
                residual_fro: F17(r.residual_fro),
                map_nnz: r.map_nnz,
                flagged_columns: r.flagged_columns,
                seed_iters: r.seed_iters,
                sam_iters: r.sam_iters,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn emit_report(summary: &SequenceSummary, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => render_csv(summary),
        ReportFormat::Json => render_json(summary),
    };
    write_file(path, &text)
}

pub fn emit_sam_report(report: &SamReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => render_sam_csv(report),
        ReportFormat::Json => render_sam_json(report),
    };
    write_file(path, &text)
}
