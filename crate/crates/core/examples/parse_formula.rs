//! Parses a HyperLTL formula, classifies its prefix and prints the negated
//! body in negation normal form.
//!
//! cargo run --example parse_formula -- "forall p1. exists p2. G(a[p1] -> b[p2])"

use hyperbarrier::formula::{negate_to_nnf, parse_hyperltl, AtomDecls};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "forall p1. forall p2. (a3[p1] & a4[p2]) -> G(a1[p1] & a1[p2])".into());
    let f = parse_hyperltl(&src, &AtomDecls::infer())?;
    println!("formula:  {f}");
    println!("fragment: {:?}", f.classify());
    println!(
        "atoms:    {:?}",
        f.body
            .atoms()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
    );
    println!("negated:  {}", negate_to_nnf(&f.body));
    Ok(())
}
