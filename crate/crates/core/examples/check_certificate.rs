//! Checks a candidate certificate against the first eligible pair of a
//! problem by sampling.
//!
//! cargo run --example check_certificate -- room_robustness.json room_candidate.json

use std::path::PathBuf;

use hyperbarrier::abc::{check_ci, CertificateCandidate, SamplerConfig, StrategyPolicy};
use hyperbarrier::pipeline::{decompose, Precheck, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let spec = fixtures.join(args.next().unwrap_or_else(|| "room_robustness.json".into()));
    let cand = fixtures.join(args.next().unwrap_or_else(|| "room_candidate.json".into()));
    let problem = Problem::load(&spec)?;
    let c: CertificateCandidate = serde_json::from_str(&std::fs::read_to_string(cand)?)?;
    let d = decompose(&problem)?;
    let pair = d
        .pairs
        .iter()
        .find(|p| p.precheck == Precheck::Eligible)
        .ok_or("no eligible pair")?;
    println!("pair {}: ({}, {})", pair.id, pair.s_a, pair.s_b);
    let cfg = SamplerConfig {
        strategy_policy: StrategyPolicy::Report,
        ..SamplerConfig::default()
    }
    .with_tol(5e-2);
    let report = check_ci(&c, &pair.ci, &problem.aug, &cfg)?;
    for r in report.reports() {
        println!(
            "{:?}: {:?}, worst {:.3e} over {} samples",
            r.condition,
            r.verdict,
            r.worst_violation.unwrap_or(f64::NAN),
            r.samples_in_region
        );
    }
    Ok(())
}
