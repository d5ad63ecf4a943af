//! Lists the lassos of a HOA automaton and their consecutive transition pairs.
//!
//! cargo run --example lasso_pairs -- crates/core/fixtures/automata/fig2.hoa

use std::path::PathBuf;

use hyperbarrier::automata::{
    enumerate_lassos, enumerate_lassos_rabin, hoa_import, transition_pairs, HoaAutomaton,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/automata/fig2.hoa")
        });
    let (graph, lassos) = match hoa_import(&std::fs::read_to_string(&path)?)? {
        HoaAutomaton::Buchi(a) => (a.graph.clone(), enumerate_lassos(&a)),
        HoaAutomaton::Rabin(a) => (a.graph.clone(), enumerate_lassos_rabin(&a)),
    };
    println!("deterministic: {}", graph.is_deterministic());
    for (i, l) in lassos.iter().enumerate() {
        let pairs: Vec<String> = transition_pairs(l, i)
            .iter()
            .map(|p| format!("({}, {})", p.s_a.label(), p.s_b.label()))
            .collect();
        println!(
            "r{} = {}  S = {{{}}}",
            i + 1,
            l.display(&graph),
            pairs.join(", ")
        );
    }
    Ok(())
}
