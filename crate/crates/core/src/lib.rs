//! Solvers and experiment tooling for sequences of slowly varying symmetric
//! linear systems: MINRES and the conjugate residual method, recycling MINRES
//! with harmonic Ritz deflation, sparse approximate map preconditioner
//! updates, and a predictor-corrector Pareto front tracer built on top.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod linops;
pub mod pareto;
pub mod rminres;
pub mod sam;

pub use error::{Error, Result};
