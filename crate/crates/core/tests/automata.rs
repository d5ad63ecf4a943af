mod common;

use std::collections::BTreeSet;

use hyperbarrier::automata::{
    enumerate_lassos, enumerate_lassos_rabin, hoa_export_buchi, hoa_import, ltl_to_nba,
    transition_pairs, BuchiAutomaton, HoaAutomaton, RabinAutomaton,
};
use hyperbarrier::formula::{
    eval_on_word, negate_to_nnf, parse_ltl_body, AtomDecls, LassoWord, Letter,
};
use proptest::prelude::*;

fn buchi(rel: &str) -> BuchiAutomaton {
    match hoa_import(&common::read_fixture(rel)).unwrap() {
        HoaAutomaton::Buchi(b) => b,
        HoaAutomaton::Rabin(_) => panic!("{rel} is not Büchi"),
    }
}

fn rabin(rel: &str) -> RabinAutomaton {
    match hoa_import(&common::read_fixture(rel)).unwrap() {
        HoaAutomaton::Rabin(r) => r,
        HoaAutomaton::Buchi(_) => panic!("{rel} is not Rabin"),
    }
}

/// Lassos rendered as state tuples, each with its set of labeled pairs.
fn rendered(aut: &BuchiAutomaton) -> BTreeSet<(String, BTreeSet<(String, String)>)> {
    enumerate_lassos(aut)
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let pairs = transition_pairs(l, i)
                .into_iter()
                .map(|p| (p.s_a.label(), p.s_b.label()))
                .collect();
            (l.display(&aut.graph), pairs)
        })
        .collect()
}

fn expected(rows: &[(&str, &[(&str, &str)])]) -> BTreeSet<(String, BTreeSet<(String, String)>)> {
    rows.iter()
        .map(|(l, ps)| {
            (
                l.to_string(),
                ps.iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
            )
        })
        .collect()
}

#[test]
fn fig2_lassos_and_pairs() {
    let aut = buchi("automata/fig2.hoa");
    assert!(aut.is_deterministic());
    let want = expected(&[
        ("(q0,q1,q5,q5)", &[("(a,b)", "(c,d)"), ("(c,d)", "true")]),
        (
            "(q0,q2,q3,q5,q5)",
            &[("(c,d)", "(d,c)"), ("(d,c)", "(c,d)"), ("(c,d)", "true")],
        ),
        (
            "(q0,q2,q4,q5,q5)",
            &[("(c,d)", "(a,b)"), ("(a,b)", "(b,a)"), ("(b,a)", "true")],
        ),
    ]);
    assert_eq!(rendered(&aut), want);
}

#[test]
fn fig3_lassos_and_pairs() {
    let aut = buchi("automata/fig3.hoa");
    assert!(!aut.is_deterministic());
    let want = expected(&[
        (
            "(q0,q1,q2,q5,q5)",
            &[("(a,b)", "(b,a)"), ("(b,a)", "(a,c)"), ("(a,c)", "true")],
        ),
        (
            "(q0,q3,q4,q5,q5)",
            &[("(a,b)", "(b,a)"), ("(b,a)", "(d,c)"), ("(d,c)", "true")],
        ),
        (
            "(q0,q3,q4,q2,q5,q5)",
            &[
                ("(a,b)", "(b,a)"),
                ("(b,a)", "(c,d)"),
                ("(c,d)", "(a,c)"),
                ("(a,c)", "true"),
            ],
        ),
    ]);
    assert_eq!(rendered(&aut), want);
}

#[test]
fn hoa_round_trip_preserves_lassos() {
    let aut = buchi("automata/fig2.hoa");
    let text = hoa_export_buchi(&aut);
    let HoaAutomaton::Buchi(back) = hoa_import(&text).unwrap() else {
        panic!("expected Büchi")
    };
    assert_eq!(rendered(&aut), rendered(&back));
}

#[test]
fn rabin_lassos_follow_good_states() {
    let aut = rabin("automata/rabin4.hoa");
    assert!(aut.is_deterministic());
    let lassos = enumerate_lassos_rabin(&aut);
    assert!(!lassos.is_empty());
    for l in &lassos {
        let k = l.pair_index.expect("Rabin lassos carry their pair");
        assert!(aut.pairs[k].good.contains(&l.accepting_state()));
    }
    let idx: BTreeSet<usize> = lassos.iter().filter_map(|l| l.pair_index).collect();
    assert_eq!(idx, BTreeSet::from([0, 1]));
}

#[test]
fn rabin_without_good_states_has_no_lassos() {
    assert!(enumerate_lassos_rabin(&rabin("automata/rabin_empty_good.hoa")).is_empty());
}

#[test]
fn buchi_as_rabin_keeps_lassos() {
    let aut = buchi("automata/fig2.hoa");
    let r = RabinAutomaton::from_buchi(&aut);
    let a: Vec<_> = enumerate_lassos(&aut).iter().map(|l| l.states()).collect();
    let b: Vec<_> = enumerate_lassos_rabin(&r)
        .iter()
        .map(|l| l.states())
        .collect();
    assert_eq!(a, b);
}

#[test]
fn case_study_overrides_are_deterministic() {
    for f in ["automata/room_negated.hoa", "automata/fig2_indexed.hoa"] {
        assert!(buchi(f).is_deterministic(), "{f}");
    }
    assert!(!buchi("automata/fig3_indexed.hoa").is_deterministic());
    // a1/a2 and a3/a4 are disjoint only semantically
    assert!(!buchi("automata/vehicle_negated.hoa").is_deterministic());
}

#[test]
fn malformed_hoa_is_rejected() {
    let good = common::read_fixture("automata/fig2.hoa");
    assert!(hoa_import(&good.replace("--END--", "")).is_err());
    assert!(hoa_import(&good.replace("Inf(0)", "Inf(0) & Inf(1)")).is_err());
    assert!(hoa_import(&good.replace("[t] 5", "[t] 9")).is_err());
}

fn letter_strategy(atoms: usize) -> impl Strategy<Value = Letter> {
    proptest::collection::vec(any::<bool>(), atoms).prop_map(|bits| {
        bits.iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| hyperbarrier::formula::IndexedAtom::new(["p", "q", "r"][i], &["t"]))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translated_negation_rejects_what_the_body_accepts(
        src in prop::sample::select(vec![
            "G p[t]",
            "F p[t]",
            "p[t] U q[t]",
            "G (p[t] -> F q[t])",
            "X (p[t] & q[t])",
            "F G p[t]",
            "G F p[t]",
            "p[t] R (q[t] | r[t])",
            "!(p[t] U (q[t] & X r[t]))",
        ]),
        stem in proptest::collection::vec(letter_strategy(3), 0..3),
        cycle in proptest::collection::vec(letter_strategy(3), 1..4),
    ) {
        let body = parse_ltl_body(src, &AtomDecls::infer()).unwrap();
        let (neg, _) = ltl_to_nba(&negate_to_nnf(&body));
        let (pos, _) = ltl_to_nba(&body);
        let word = LassoWord { stem, cycle };
        let truth = eval_on_word(&body, &word).unwrap();
        prop_assert_eq!(pos.accepts_lasso_word(&word), truth);
        prop_assert_eq!(neg.accepts_lasso_word(&word), !truth);
    }
}
