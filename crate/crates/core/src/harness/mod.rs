//! Experiment engine for sequences of systems: ingestion, synthetic
//! generation, the MINRES/RMINRES comparison, SAM evaluation and reports.

mod compare;
mod generate;
mod mtx;
mod report;
mod sam_eval;

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::linops::{DenseVector, SparseMatrix};

pub use compare::{
    reduction_percent, run_comparison, ComparisonOptions, ComparisonRecord, SequenceSummary, DEFAULT_COND_ITERS,
};
pub use generate::{banded_with_spectrum, draw_spectrum, generate_sequence, Spectrum, HALF_BANDWIDTH, ROTATION_LAYERS};
pub use mtx::{load_directory, load_manifest, load_matrix_market, load_vector, write_matrix_market};
pub use report::{
    emit_report, emit_sam_report, format_float, render_csv, render_json, render_sam_csv, render_sam_json, ReportFormat,
    COMPARISON_COLUMNS, SAM_COLUMNS,
};
pub use sam_eval::{run_sam_eval, SamEvalOptions, SamRecord, SamReport, SamTarget, SeedPrecond};

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Files(Vec<PathBuf>),
    Synthetic { n: usize, m: usize, drift: f64, spectrum: Spectrum, seed: u64 },
}

/// Ordered systems `(A_k, b_k)` of a common dimension, all symmetric.
#[derive(Debug, Clone)]
pub struct SystemSequence {
    systems: Vec<(SparseMatrix, DenseVector)>,
    provenance: Provenance,
}

impl SystemSequence {
    pub fn new(systems: Vec<(SparseMatrix, DenseVector)>, provenance: Provenance) -> Result<Self> {
        let n = systems.first().map_or(0, |(a, _)| a.n_rows());
        for (a, b) in &systems {
            if !a.is_square() || a.n_rows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.n_rows() });
            }
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.len() });
            }
            if !a.is_symmetric() {
                return Err(Error::InvalidParameter("sequence matrices must be flagged symmetric".into()));
            }
        }
        Ok(SystemSequence { systems, provenance })
    }

    pub fn n(&self) -> usize {
        self.systems.first().map_or(0, |(a, _)| a.n_rows())
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn systems(&self) -> &[(SparseMatrix, DenseVector)] {
        &self.systems
    }

    pub fn matrix(&self, k: usize) -> &SparseMatrix {
        &self.systems[k].0
    }

    pub fn rhs(&self, k: usize) -> &[f64] {
        &self.systems[k].1
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}
