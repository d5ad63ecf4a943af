//! Searches for a point shared by two semialgebraic sets, the pre-check that
//! discards transition pairs no certificate can separate.

use std::collections::BTreeMap;

use hyperbarrier::polysys::{
    parse_unchecked, region_overlap_witness, BasicSet, IntervalBox, SemialgebraicRegion,
};

fn region(gs: &[&str], dims: &[String]) -> SemialgebraicRegion {
    let gs = gs
        .iter()
        .map(|g| parse_unchecked(g).expect("valid polynomial"))
        .collect();
    SemialgebraicRegion::from_basic(BasicSet::new(gs, dims).expect("known variables"))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dims: Vec<String> = ["v__1", "v__2"].map(String::from).to_vec();
    let bounds = IntervalBox::from_bounds(BTreeMap::from([
        ("v__1".to_string(), (0.0, 0.6)),
        ("v__2".to_string(), (0.0, 0.6)),
    ]));
    let close = region(&["0.0225 - (v__1 - v__2)^2"], &dims);
    let far = region(&["(v__1 - v__2)^2 - 0.0325"], &dims);
    let anything = SemialgebraicRegion::full(&dims);
    println!(
        "close vs far:      {:?}",
        region_overlap_witness(&close, &far, &bounds, 20_000, 0)?
    );
    println!(
        "far vs everything: {:?}",
        region_overlap_witness(&far, &anything, &bounds, 20_000, 0)?
    );
    Ok(())
}
