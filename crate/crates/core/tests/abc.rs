mod common;

use hyperbarrier::abc::{
    check_ci, check_classic_bc, simulate, CertificateCandidate, SamplerConfig, StrategyPolicy,
};
use hyperbarrier::pipeline::{decompose, PairEntry, Precheck, Problem};
use hyperbarrier::polysys::{parse_unchecked, BasicSet, DynamicalSystem, SemialgebraicRegion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn candidate(rel: &str) -> CertificateCandidate {
    serde_json::from_str(&common::read_fixture(rel)).unwrap()
}

fn eligible(pb: &Problem) -> PairEntry {
    let d = decompose(pb).unwrap();
    d.pairs
        .into_iter()
        .find(|p| p.precheck == Precheck::Eligible)
        .expect("an eligible pair")
}

fn cfg(tol: f64) -> SamplerConfig {
    SamplerConfig {
        strategy_policy: StrategyPolicy::Report,
        ..SamplerConfig::default()
    }
    .with_tol(tol)
}

#[test]
fn room_certificate_passes_on_both_automata() {
    let c = candidate("room_candidate.json");
    for spec in ["room_robustness.json", "room_robustness_override.json"] {
        let pb = Problem::load(&common::fixture(spec)).unwrap();
        let r = check_ci(&c, &eligible(&pb).ci, &pb.aug, &cfg(5e-2)).unwrap();
        assert!(r.passed(), "{spec}: {r:?}");
        assert!(r
            .reports()
            .iter()
            .all(|c| c.samples_in_region >= 10_000 || c.samples_tried >= 10_000));
    }
}

#[test]
fn vehicle_certificate_passes_on_both_automata() {
    let c = candidate("vehicle_candidate.json");
    for spec in ["vehicle_opacity.json", "vehicle_opacity_override.json"] {
        let pb = Problem::load(&common::fixture(spec)).unwrap();
        let r = check_ci(&c, &eligible(&pb).ci, &pb.aug, &cfg(5e-2)).unwrap();
        assert!(r.passed(), "{spec}: {r:?}");
    }
}

#[test]
fn vehicle_strategy_leaves_the_input_set() {
    let c = candidate("vehicle_candidate.json");
    let pb = Problem::load(&common::fixture("vehicle_opacity_override.json")).unwrap();
    let r = check_ci(&c, &eligible(&pb).ci, &pb.aug, &cfg(5e-2)).unwrap();
    let feas = r
        .decrease
        .strategy_feasibility
        .as_ref()
        .expect("strategies are checked");
    assert!(!feas.ok);
    let enforce = SamplerConfig::default().with_tol(5e-2);
    assert!(!check_ci(&c, &eligible(&pb).ci, &pb.aug, &enforce)
        .unwrap()
        .passed());
}

#[test]
fn perturbed_certificate_fails_with_a_witness() {
    let mut c = candidate("room_candidate.json");
    c.barrier = c.barrier + parse_unchecked("-5").unwrap();
    let pb = Problem::load(&common::fixture("room_robustness_override.json")).unwrap();
    let r = check_ci(&c, &eligible(&pb).ci, &pb.aug, &cfg(5e-2)).unwrap();
    assert!(!r.passed());
    assert!(r.unsafe_.witness.is_some());
}

#[test]
fn checks_are_reproducible_for_a_seed() {
    let c = candidate("room_candidate.json");
    let pb = Problem::load(&common::fixture("room_robustness_override.json")).unwrap();
    let ci = eligible(&pb).ci;
    let a = check_ci(&c, &ci, &pb.aug, &cfg(1e-9).with_seed(7)).unwrap();
    let b = check_ci(&c, &ci, &pb.aug, &cfg(1e-9).with_seed(7)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn classic_barrier_certificate() {
    let d = vec!["x".to_string()];
    let f = vec![parse_unchecked("0.5*x").unwrap()];
    let x = BasicSet::new(vec![parse_unchecked("x*(2 - x)").unwrap()], &d).unwrap();
    let sys = DynamicalSystem::new(d.clone(), Vec::new(), f, x, BasicSet::full(&[])).unwrap();
    let init = SemialgebraicRegion::from_basic(
        BasicSet::new(vec![parse_unchecked("(x)*(0.5 - x)").unwrap()], &d).unwrap(),
    );
    let unsafe_set = SemialgebraicRegion::from_basic(
        BasicSet::new(vec![parse_unchecked("(x - 1.5)*(2 - x)").unwrap()], &d).unwrap(),
    );
    let b = parse_unchecked("x^2 - 1").unwrap();
    assert!(check_classic_bc(
        &b,
        &sys,
        &init,
        &unsafe_set,
        0.01,
        &SamplerConfig::default()
    )
    .unwrap()
    .passed());
    let bad = parse_unchecked("1 - x^2").unwrap();
    assert!(!check_classic_bc(
        &bad,
        &sys,
        &init,
        &unsafe_set,
        0.01,
        &SamplerConfig::default()
    )
    .unwrap()
    .passed());
}

#[test]
fn vehicle_runs_stay_out_of_the_unsafe_set() {
    let c = candidate("vehicle_candidate.json");
    let pb = Problem::load(&common::fixture("vehicle_opacity_override.json")).unwrap();
    let pair = eligible(&pb);
    let prefix = pb.formula.quantifiers();
    let compiled_a = pair.ci.set_a.clauses()[0]
        .compile(&pb.aug.state_vars)
        .unwrap();
    let set_b = &pair.ci.set_b;
    let sampler = pair.ci.set_a.clauses()[0]
        .box_within(&pb.aug.sampling_box())
        .sampler(&pb.aug.state_vars)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runs = 0;
    while runs < 20 {
        let x0 = sampler.random(&mut rng);
        if !compiled_a.contains(&x0, 0.0) {
            continue;
        }
        runs += 1;
        let t = simulate(&c, &pb.aug, &prefix, &x0, 100, &mut rng).unwrap();
        assert!(t.max_increase() <= 5e-2, "increase {}", t.max_increase());
        for x in &t.states {
            let pt = sampler.to_map(x);
            assert!(
                !set_b.contains(&pt, 0.0).unwrap(),
                "entered set_B at {pt:?}"
            );
        }
    }
}
