//! Simulates the two-copy vehicle under the strategy of a candidate
//! certificate and prints the barrier value along one run.

use std::path::PathBuf;

use hyperbarrier::abc::{simulate, CertificateCandidate};
use hyperbarrier::pipeline::Problem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let problem = Problem::load(&fixtures.join("vehicle_opacity.json"))?;
    let c: CertificateCandidate = serde_json::from_str(&std::fs::read_to_string(
        fixtures.join("vehicle_candidate.json"),
    )?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // s__1, v__1, s__2, v__2: both cars start in a1/a2 with close velocities
    let x0 = [0.5, 0.10, 1.5, 0.15];
    let run = simulate(
        &c,
        &problem.aug,
        &problem.formula.quantifiers(),
        &x0,
        100,
        &mut rng,
    )?;
    println!("vars: {:?}", problem.aug.state_vars);
    for (x, b) in run.states.iter().zip(&run.barrier) {
        println!(
            "{:>8.4} {:>8.4} {:>8.4} {:>8.4}  B = {b:.5}",
            x[0], x[1], x[2], x[3]
        );
    }
    if run.left_state_set {
        println!("stopped: the next state leaves the state set");
    }
    Ok(())
}
