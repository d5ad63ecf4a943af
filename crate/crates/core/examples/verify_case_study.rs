//! Runs the full verification of a bundled case study and prints a summary.
//!
//! cargo run --release --example verify_case_study -- vehicle_opacity.json

use std::path::PathBuf;

use hyperbarrier::pipeline::{verify, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "room_robustness.json".into());
    let problem = Problem::load(
        &PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name),
    )?;
    let report = verify(&problem)?;
    println!(
        "{}: {:?} in {} ms",
        report.formula, report.verdict, report.elapsed_ms
    );
    for l in &report.lassos {
        println!("  lasso {} {:?}: {:?}", l.id, l.states, l.denial);
    }
    for c in &report.certificates {
        println!("  certificate {} for pairs {:?}", c.id, c.pairs);
        println!("    B = {}", c.candidate.barrier);
        for (w, h) in &c.candidate.strategies {
            println!("    {w} = {h}");
        }
    }
    if !report.causes.is_empty() {
        println!("  causes: {:?}", report.causes);
    }
    std::process::exit(report.exit_code());
}
