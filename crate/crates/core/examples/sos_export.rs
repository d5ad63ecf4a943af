//! Writes the SOS membership program of a polynomial in sparse SDPA form and
//! solves it when a solver is available.
//!
//! cargo run --example sos_export -- "x^2 + 2*x + 1"
//! cargo run --example sos_export -- motzkin

use hyperbarrier::polysys::parse_unchecked;
use hyperbarrier::sos::{coefficient_match, export_sdpa, find_solver, solve_program, to_sdp, Exps};

const MOTZKIN: &str = "x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "x^2 + 2*x + 1".into());
    let (src, basis): (&str, Option<Vec<Exps>>) = if arg == "motzkin" {
        (
            MOTZKIN,
            Some(vec![vec![0, 0], vec![1, 1], vec![2, 1], vec![1, 2]]),
        )
    } else {
        (arg.as_str(), None)
    };
    let p = parse_unchecked(src)?;
    let prog = coefficient_match(&p, basis.as_deref())?;
    let sdp = to_sdp(&prog, 0.0);
    print!("{}", export_sdpa(&sdp));
    match find_solver(None) {
        Some(solver) => {
            let syn = solve_program(&prog, &solver, 0.0, 1e-6)?;
            eprintln!("solver status: {:?}", syn.status);
            if let Some(g) = syn.gram {
                eprintln!(
                    "gram check ok: {} (max residual {:.2e})",
                    g.ok, g.max_residual
                );
            }
        }
        None => eprintln!("no SDP solver found, skipping the solve"),
    }
    Ok(())
}
