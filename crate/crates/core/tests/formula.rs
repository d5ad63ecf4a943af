use hyperbarrier::formula::{
    classify, eval_on_word, negate_to_nnf, nnf, parse_hyperltl, parse_ltl_body, AtomDecls,
    FragmentClass, IndexedAtom, LassoWord, Letter, Ltl, Quantifier,
};
use proptest::prelude::*;

fn decls() -> AtomDecls {
    AtomDecls::new([
        ("a".to_string(), 1),
        ("b".to_string(), 1),
        ("c".to_string(), 2),
    ])
}

#[test]
fn parses_case_study_formulas() {
    let decls = AtomDecls::new([("a1".into(), 1), ("a2".into(), 1), ("a3".into(), 2)]);
    let f = parse_hyperltl(
        "forall p1. exists p2. (a1[p1] -> (a2[p2] & G(a3[p1,p2])))",
        &decls,
    )
    .unwrap();
    assert_eq!(
        f.quantifiers(),
        vec![Quantifier::Forall, Quantifier::Exists]
    );
    assert_eq!(f.classify(), FragmentClass::ForallStarExistsStar { l: 1 });
    assert_eq!(f.classify().forall_exists_split(2), Some(1));
}

#[test]
fn classification_of_prefixes() {
    use Quantifier::*;
    assert_eq!(classify(&[Forall, Forall]), FragmentClass::AllUniversal);
    assert_eq!(classify(&[Exists]), FragmentClass::AllExistential);
    assert_eq!(
        classify(&[Forall, Exists, Exists]),
        FragmentClass::ForallStarExistsStar { l: 1 }
    );
    assert!(matches!(
        classify(&[Exists, Forall]),
        FragmentClass::General { .. }
    ));
    assert_eq!(classify(&[Exists, Forall]).forall_exists_split(2), None);
}

#[test]
fn parse_errors() {
    let d = decls();
    assert!(parse_hyperltl("forall p. a[q]", &d).is_err());
    assert!(parse_hyperltl("forall p. c[p]", &d).is_err());
    assert!(parse_hyperltl("forall p. forall p. a[p]", &d).is_err());
    assert!(parse_hyperltl("forall p. (a[p]", &d).is_err());
    assert!(parse_hyperltl("forall p. z[p]", &d).is_err());
}

fn atom_strategy() -> impl Strategy<Value = Ltl> {
    prop_oneof![
        Just(Ltl::atom("a", &["p"])),
        Just(Ltl::atom("b", &["p"])),
        Just(Ltl::atom("c", &["p", "q"])),
    ]
}

fn ltl_strategy() -> impl Strategy<Value = Ltl> {
    atom_strategy().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Ltl::not),
            inner.clone().prop_map(Ltl::next),
            inner.clone().prop_map(Ltl::globally),
            inner.clone().prop_map(Ltl::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::until(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Ltl::release(a, b)),
        ]
    })
}

fn letter_strategy() -> impl Strategy<Value = Letter> {
    (any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(a, b, c)| {
        let mut l = Letter::new();
        if a {
            l.insert(IndexedAtom::new("a", &["p"]));
        }
        if b {
            l.insert(IndexedAtom::new("b", &["p"]));
        }
        if c {
            l.insert(IndexedAtom::new("c", &["p", "q"]));
        }
        l
    })
}

fn word_strategy() -> impl Strategy<Value = LassoWord> {
    (
        proptest::collection::vec(letter_strategy(), 0..3),
        proptest::collection::vec(letter_strategy(), 1..4),
    )
        .prop_map(|(stem, cycle)| LassoWord { stem, cycle })
}

proptest! {
    #[test]
    fn display_parse_round_trip(f in ltl_strategy()) {
        let back = parse_ltl_body(&f.to_string(), &decls()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn nnf_preserves_semantics(f in ltl_strategy(), w in word_strategy()) {
        let n = nnf(&f);
        prop_assert!(n.is_nnf());
        prop_assert_eq!(eval_on_word(&n, &w).unwrap(), eval_on_word(&f, &w).unwrap());
    }

    #[test]
    fn negation_flips_truth(f in ltl_strategy(), w in word_strategy()) {
        let neg = negate_to_nnf(&f);
        prop_assert!(neg.is_nnf());
        prop_assert_eq!(eval_on_word(&neg, &w).unwrap(), !eval_on_word(&f, &w).unwrap());
    }
}
