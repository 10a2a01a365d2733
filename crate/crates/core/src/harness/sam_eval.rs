use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{minres_solve, SolveOptions};
use crate::linops::{ic0, jacobi_precond, probe_spd, Preconditioner, SparseMatrix};
use crate::sam::{build_pattern, compute_sam, PatternStrategy, SamMap};

use super::SystemSequence;

/// Probe count and seed for the symmetric-positive check on composed preconditioners.
const SPD_PROBES: usize = 8;
const SPD_PROBE_SEED: u64 = 0x5a11_0b5e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamTarget {
    /// Map every `A_k` toward `A_0`.
    First,
    /// Map `A_k` toward `A_{k-1}`; preconditioners compose along the chain.
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedPrecond {
    None,
    Jacobi,
    Ic0,
}

impl fmt::Display for SeedPrecond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedPrecond::None => "none",
            SeedPrecond::Jacobi => "jacobi",
            SeedPrecond::Ic0 => "ic0",
        })
    }
}

impl FromStr for SeedPrecond {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SeedPrecond::None),
            "jacobi" => Ok(SeedPrecond::Jacobi),
            "ic0" => Ok(SeedPrecond::Ic0),
            _ => Err(Error::InvalidParameter(format!("unknown seed preconditioner '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamEvalOptions {
    pub pattern: PatternStrategy,
    pub seed_precond: SeedPrecond,
    pub target: SamTarget,
    pub solve: SolveOptions,
}

impl Default for SamEvalOptions {
    fn default() -> Self {
        SamEvalOptions {
            pattern: PatternStrategy::PatternOfA,
            seed_precond: SeedPrecond::None,
            target: SamTarget::First,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamRecord {
    pub k: usize,
    pub residual_fro: f64,
    pub map_nnz: usize,
    pub flagged_columns: usize,
    /// MINRES iterations on `A_k` with the seed preconditioner as is.
    pub seed_iters: Option<usize>,
    /// MINRES iterations on `A_k` with the SAM-composed preconditioner.
    pub sam_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamReport {
    pub target: SamTarget,
    /// Seed preconditioner actually used (after any fallback).
    pub seed_precond: SeedPrecond,
    pub warnings: Vec<String>,
    pub records: Vec<SamRecord>,
}

/// `z = N_k ... N_1 P_0^{-1} v` (a single map when targeting the first system).
struct MapChain<'a> {
    maps: Vec<&'a SparseMatrix>,
    seed: &'a dyn Preconditioner,
}

impl Preconditioner for MapChain<'_> {
    fn dim(&self) -> usize {
        self.seed.dim()
    }

    fn apply_inverse(&self, v: &[f64], z: &mut [f64]) {
        let mut t = self.seed.apply_inverse_vec(v);
        for n in &self.maps {
            t = n.matvec(&t).expect("maps share the sequence dimension");
        }
        z.copy_from_slice(&t);
    }

    fn description(&self) -> String {
        format!("sam^{}({})", self.maps.len(), self.seed.description())
    }
}

fn build_seed(
    a0: &SparseMatrix,
    kind: SeedPrecond,
    warnings: &mut Vec<String>,
) -> Result<(SeedPrecond, Option<Box<dyn Preconditioner>>)> {
    match kind {
        SeedPrecond::None => Ok((SeedPrecond::None, None)),
        SeedPrecond::Jacobi => Ok((SeedPrecond::Jacobi, Some(Box::new(jacobi_precond(a0)?)))),
        SeedPrecond::Ic0 => match ic0(a0) {
            Ok(p) => Ok((SeedPrecond::Ic0, Some(Box::new(p)))),
            Err(e) => {
                warnings.push(format!("ic0 failed on A_0 ({e}); falling back to jacobi"));
                Ok((SeedPrecond::Jacobi, Some(Box::new(jacobi_precond(a0)?))))
            }
        },
    }
}

/// Computes a sparse approximate map for every system and, when a seed
/// preconditioner is requested, paired MINRES iteration counts with the seed
/// alone and with the composed preconditioner.
///
/// MINRES needs a symmetric positive definite preconditioner. Paired counts
/// are reported only for systems where both preconditioners pass a probe
/// check; skipped systems leave the counts empty and add a warning.
pub fn run_sam_eval(seq: &SystemSequence, opts: &SamEvalOptions) -> Result<SamReport> {
    if seq.is_empty() {
        return Err(Error::InvalidParameter("empty sequence".into()));
    }
    opts.solve.validate()?;
    if let PatternStrategy::Threshold(tau) = opts.pattern {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter(format!("threshold tau must lie in (0, 1], got {tau}")));
        }
    }
    let mut warnings = Vec::new();
    let (seed_kind, seed) = build_seed(seq.matrix(0), opts.seed_precond, &mut warnings)?;

    let maps: Vec<SamMap> = (0..seq.len())
        .into_par_iter()
        .map(|k| {
            let a_k = seq.matrix(k);
            let target = match opts.target {
                SamTarget::First => seq.matrix(0),
                SamTarget::Previous => seq.matrix(k.saturating_sub(1)),
            };
            let pattern = build_pattern(a_k, opts.pattern)?;
            compute_sam(a_k, target, &pattern)
        })
        .collect::<Result<_>>()?;

    let n = seq.n();
    let zeros = vec![0.0; n];
    let mut records = Vec::with_capacity(seq.len());
    let seed_ok = seed.as_deref().is_some_and(|p| probe_spd(p, SPD_PROBES, SPD_PROBE_SEED));
    if seed.is_some() && !seed_ok {
        warnings.push(format!("{seed_kind} seed preconditioner is not SPD; paired counts skipped"));
    }

    for (k, map) in maps.iter().enumerate() {
        let mut record = SamRecord {
            k,
            residual_fro: map.residual_fro,
            map_nnz: map.map.nnz(),
            flagged_columns: map.flagged.len(),
            seed_iters: None,
            sam_iters: None,
        };
        if let (Some(p0), true) = (seed.as_deref(), seed_ok) {
            let chain = MapChain {
                maps: match opts.target {
                    SamTarget::First => vec![&map.map],
                    SamTarget::Previous => maps[1..=k].iter().map(|m| &m.map).collect(),
                },
                seed: p0,
            };
            if probe_spd(&chain, SPD_PROBES, SPD_PROBE_SEED) {
                let a = seq.matrix(k);
                let (_, base) = minres_solve(a, seq.rhs(k), &zeros, &opts.solve, Some(p0))?;
                let (_, with_map) = minres_solve(a, seq.rhs(k), &zeros, &opts.solve, Some(&chain))?;
                record.seed_iters = Some(base.iterations);
                record.sam_iters = Some(with_map.iterations);
            } else {
                warnings.push(format!("system {k}: composed preconditioner is not SPD; paired counts skipped"));
            }
        }
        records.push(record);
    }

    Ok(SamReport { target: opts.target, seed_precond: seed_kind, warnings, records })
}
