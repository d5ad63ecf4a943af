//! Translates an LTL body to a Büchi automaton and prints it as HOA.
//!
//! cargo run --example ltl_automaton -- "F (a[p] & X !b[p])"

use hyperbarrier::automata::{hoa_export_buchi, ltl_to_nba};
use hyperbarrier::formula::{parse_ltl_body, AtomDecls};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "a[p] U (b[p] & G c[p])".into());
    let body = parse_ltl_body(&src, &AtomDecls::infer())?;
    let (aut, stats) = ltl_to_nba(&body);
    eprintln!("{stats:?}");
    print!("{}", hoa_export_buchi(&aut.prune()));
    Ok(())
}
