use std::collections::BTreeMap;

use hyperbarrier::polysys::{
    parse_polynomial, parse_unchecked, region_overlap_witness, self_compose, BasicSet,
    DynamicalSystem, IntervalBox, Polynomial, SemialgebraicRegion,
};
use proptest::prelude::*;

fn vars(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn point(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn vehicle() -> DynamicalSystem {
    let all = vars(&["s", "v", "w"]);
    let f = vec![
        parse_polynomial("s + v + 0.5*w", &all).unwrap(),
        parse_polynomial("v + w", &all).unwrap(),
    ];
    let x = BasicSet::new(
        vec![
            parse_unchecked("s*(8 - s)").unwrap(),
            parse_unchecked("v*(0.6 - v)").unwrap(),
        ],
        &vars(&["s", "v"]),
    )
    .unwrap();
    let w = BasicSet::new(
        vec![parse_unchecked("(w + 0.04)*(0.04 - w)").unwrap()],
        &vars(&["w"]),
    )
    .unwrap();
    DynamicalSystem::new(vars(&["s", "v"]), vars(&["w"]), f, x, w).unwrap()
}

#[test]
fn parse_rejects_unknown_variables() {
    assert!(parse_polynomial("x + y", &["x"]).is_err());
    assert!(parse_polynomial("x^", &["x"]).is_err());
}

#[test]
fn self_composition_renames_per_copy() {
    let aug = self_compose(&vehicle(), 2).unwrap();
    assert_eq!(aug.state_vars, vars(&["s__1", "v__1", "s__2", "v__2"]));
    assert_eq!(aug.copy_input_vars(2), vars(&["w__2"]));
    let t = aug.transition_map();
    assert_eq!(
        t["s__2"],
        parse_unchecked("s__2 + v__2 + 0.5*w__2").unwrap()
    );
}

#[test]
fn step_matches_dynamics() {
    let sys = vehicle();
    let next = sys.step(&[1.0, 0.2], &[0.02]).unwrap();
    assert!((next[0] - 1.21).abs() < 1e-12);
    assert!((next[1] - 0.22).abs() < 1e-12);
}

#[test]
fn overlap_witness_found_and_absent() {
    let d = vars(&["x"]);
    let a = SemialgebraicRegion::from_basic(
        BasicSet::new(vec![parse_unchecked("x*(1 - x)").unwrap()], &d).unwrap(),
    );
    let b = SemialgebraicRegion::from_basic(
        BasicSet::new(vec![parse_unchecked("(x - 0.5)*(2 - x)").unwrap()], &d).unwrap(),
    );
    let c = SemialgebraicRegion::from_basic(
        BasicSet::new(vec![parse_unchecked("(x - 3)*(4 - x)").unwrap()], &d).unwrap(),
    );
    let bx = IntervalBox::from_bounds(BTreeMap::from([("x".to_string(), (-5.0, 5.0))]));
    let w = region_overlap_witness(&a, &b, &bx, 1000, 0)
        .unwrap()
        .expect("overlap");
    assert!(a.contains(&w, 1e-9).unwrap() && b.contains(&w, 1e-9).unwrap());
    assert!(region_overlap_witness(&a, &c, &bx, 1000, 0)
        .unwrap()
        .is_none());
}

#[test]
fn complement_keeps_a_gap() {
    let d = vars(&["x"]);
    let a = BasicSet::new(vec![parse_unchecked("x*(1 - x)").unwrap()], &d).unwrap();
    let c = a.complement(0.01).unwrap();
    assert!(!c.contains(&point(&[("x", 0.5)]), 0.0).unwrap());
    assert!(!c.contains(&point(&[("x", 1.0)]), 0.0).unwrap());
    assert!(c.contains(&point(&[("x", 1.5)]), 0.0).unwrap());
}

fn small_poly() -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((-3i32..4, 0u32..3, 0u32..3), 1..5).prop_map(|terms| {
        terms
            .into_iter()
            .fold(Polynomial::zero(), |acc, (c, i, j)| {
                acc + Polynomial::var("x").pow(i)
                    * Polynomial::var("y").pow(j)
                    * Polynomial::constant(c as f64)
            })
    })
}

proptest! {
    #[test]
    fn display_parse_round_trip(p in small_poly()) {
        let back = parse_unchecked(&p.to_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn arithmetic_agrees_with_evaluation(p in small_poly(), q in small_poly(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let pt = point(&[("x", x), ("y", y)]);
        let (pv, qv) = (p.eval(&pt).unwrap(), q.eval(&pt).unwrap());
        let prod = (p.clone() * q.clone()).eval(&pt).unwrap();
        let sum = (p.clone() + q.clone()).eval(&pt).unwrap();
        prop_assert!((prod - pv * qv).abs() <= 1e-9 * (1.0 + prod.abs()));
        prop_assert!((sum - (pv + qv)).abs() <= 1e-9 * (1.0 + sum.abs()));
    }

    #[test]
    fn substitution_is_composition(p in small_poly(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let sub = BTreeMap::from([
            ("x".to_string(), parse_unchecked("x + y").unwrap()),
            ("y".to_string(), parse_unchecked("x*y").unwrap()),
        ]);
        let lhs = p.substitute(&sub).eval(&point(&[("x", x), ("y", y)])).unwrap();
        let rhs = p.eval(&point(&[("x", x + y), ("y", x * y)])).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn derived_box_contains_members(lo in -3.0f64..0.0, width in 0.1f64..3.0, t in 0.0f64..1.0) {
        let hi = lo + width;
        let g = parse_unchecked(&format!("(x - ({lo}))*(({hi}) - x)")).unwrap();
        let set = BasicSet::new(vec![g], &vars(&["x"])).unwrap();
        let bx = set.derived_box();
        let (a, b) = bx.get("x").expect("bounded");
        let x = lo + t * width;
        prop_assert!(a <= x + 1e-9 && x <= b + 1e-9);
    }
}
