//! Runs MINRES and recycling MINRES over the synthetic benchmark sequence and
//! prints per-system iteration counts.
//!
//! `cargo run --release --example recycling_benchmark -- [seed]`

use seqsolve::harness::{generate_sequence, run_comparison, ComparisonOptions, Spectrum};

fn main() -> seqsolve::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let seq = generate_sequence(200, 20, 1e-4, Spectrum::Indefinite, seed)?;
    let summary = run_comparison(&seq, &ComparisonOptions::default())?;
    println!("{:>3} {:>7} {:>8}", "k", "minres", "rminres");
    for r in &summary.records {
        println!("{:>3} {:>7} {:>8}", r.k, r.minres_iters, r.rminres_iters);
    }
    println!(
        "total {} -> {} ({:.2}% fewer iterations)",
        summary.total_minres_iters, summary.total_rminres_iters, summary.reduction_percent
    );
    Ok(())
}
