//! One line per acceptance criterion. Exits nonzero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use hyperbarrier::abc::{
    check_ci, simulate, CertificateCandidate, ConditionalInvariance, SamplerConfig, StrategyPolicy,
};
use hyperbarrier::automata::{
    enumerate_lassos, hoa_import, ltl_to_nba, transition_pairs, BuchiAutomaton, HoaAutomaton,
};
use hyperbarrier::formula::{eval_on_word, IndexedAtom, LassoWord, Letter, Ltl};
use hyperbarrier::pipeline::{
    decompose, verify, verify_general, AbcOracle, Cause, Decomposition, Evidence, PairEntry,
    Precheck, Problem,
};
use hyperbarrier::polysys::{
    parse_unchecked, region_overlap_witness, Polynomial, SemialgebraicRegion,
};
use hyperbarrier::sos::{
    coefficient_match, export_sdpa, find_solver, import_solution, solve_program, to_sdp,
    validate_gram,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "lasso and pair goldens",
            Duration::from_secs(1),
            lasso_goldens,
        ),
        (
            "case-study decomposition",
            Duration::from_secs(5),
            case_study_decomposition,
        ),
        (
            "printed certificates pass sampled checks",
            Duration::from_secs(30),
            printed_certificates,
        ),
        ("end-to-end synthesis", Duration::from_secs(600), end_to_end),
        (
            "LTL to NBA agrees with the evaluator",
            Duration::from_secs(60),
            translation_suite,
        ),
        ("SOS reduction sanity", Duration::from_secs(10), sos_sanity),
        (
            "overlap pre-check removes pairs",
            Duration::from_secs(30),
            overlap_precheck,
        ),
        (
            "trajectory spot-checks",
            Duration::from_secs(60),
            trajectories,
        ),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) if took > *budget => (
                "FAIL",
                format!(
                    "{d}; took {:.2}s, budget {:.0}s",
                    took.as_secs_f64(),
                    budget.as_secs_f64()
                ),
            ),
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => ("FAIL", d),
            Outcome::Skip(d) => ("SKIP", d),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} criterion {} {name}: {detail} [{:.2}s]",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("{} of {} criteria failed", failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn load(rel: &str) -> Problem {
    Problem::load(&common::fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn candidate(rel: &str) -> CertificateCandidate {
    serde_json::from_str(&common::read_fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

// criterion 1

fn buchi(rel: &str) -> BuchiAutomaton {
    match hoa_import(&common::read_fixture(rel)).unwrap() {
        HoaAutomaton::Buchi(b) => b,
        HoaAutomaton::Rabin(_) => panic!("{rel}: expected a Büchi automaton"),
    }
}

type Rendered = BTreeSet<(String, BTreeSet<(String, String)>)>;

fn rendered(aut: &BuchiAutomaton) -> Rendered {
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

fn expected(rows: &[(&str, &[(&str, &str)])]) -> Rendered {
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

fn lasso_goldens() -> Outcome {
    let fig2 = expected(&[
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
    let fig3 = expected(&[
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
    let mut bad = Vec::new();
    for (file, want) in [("automata/fig2.hoa", fig2), ("automata/fig3.hoa", fig3)] {
        let got = rendered(&buchi(file));
        if got != want {
            bad.push(format!("{file}: got {got:?}"));
        }
    }
    if bad.is_empty() {
        Outcome::Pass("3 lassos each, pair sets identical".into())
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// criterion 2

/// Regions agree inside `X^p` when sampling finds no point in either
/// difference. Differences use the gapped complement, so slivers narrower
/// than the gap are not distinguished.
fn regions_equivalent(pb: &Problem, r1: &SemialgebraicRegion, r2: &SemialgebraicRegion) -> bool {
    const GAP: f64 = 1e-4;
    let bounds = pb.aug.sampling_box();
    let x = &pb.aug.state_set;
    let (a, b) = (r1.intersect_basic(x), r2.intersect_basic(x));
    let differs = |p: &SemialgebraicRegion, q: &SemialgebraicRegion| {
        let comp = q.complement(GAP).expect("positive gap");
        region_overlap_witness(p, &comp, &bounds, 20_000, 0)
            .expect("same dimensions")
            .is_some()
    };
    !differs(&a, &b) && !differs(&b, &a)
}

fn pair_equivalent(pb: &Problem, ci: &ConditionalInvariance, want: &ConditionalInvariance) -> bool {
    regions_equivalent(pb, &ci.set_a, &want.set_a) && regions_equivalent(pb, &ci.set_b, &want.set_b)
}

fn expected_cis(pb: &Problem, pairs: &[(&str, &str)]) -> Vec<(String, ConditionalInvariance)> {
    let decls = pb.spec.decls();
    pairs
        .iter()
        .map(|(a, b)| {
            let ga = pb.labeling.parse_guard(a, &decls).unwrap();
            let gb = pb.labeling.parse_guard(b, &decls).unwrap();
            let ci = ConditionalInvariance {
                prefix: pb.formula.quantifiers(),
                set_a: pb.labeling.guard_region(&ga).unwrap(),
                set_b: pb.labeling.guard_region(&gb).unwrap(),
                provenance: None,
            };
            (format!("({a}, {b})"), ci)
        })
        .collect()
}

/// Every expected pair has an equivalent decomposed pair, and every eligible
/// decomposed pair has an equivalent expected pair.
fn compare_pairs(pb: &Problem, d: &Decomposition, want: &[(&str, &str)]) -> Result<(), String> {
    let want = expected_cis(pb, want);
    let mut problems = Vec::new();
    for (label, ci) in &want {
        if !d.pairs.iter().any(|p| pair_equivalent(pb, &p.ci, ci)) {
            problems.push(format!("missing {label}"));
        }
    }
    for p in d.pairs.iter().filter(|p| p.precheck == Precheck::Eligible) {
        if !want.iter().any(|(_, ci)| pair_equivalent(pb, &p.ci, ci)) {
            problems.push(format!("unexpected eligible ({}, {})", p.s_a, p.s_b));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.join(", "))
    }
}

fn case_study_decomposition() -> Outcome {
    // a4 is the gapped complement of a3: (v1 - v2)^2 >= 0.0225 + 0.01
    let vehicle: &[(&str, &str)] = &[
        ("a1[p1] & a2[p2] & a3[p1,p2]", "!a3[p1,p2]"),
        ("a1[p1] & a1[p2]", "true"),
        ("!a3[p1,p2]", "true"),
    ];
    let room: &[(&str, &str)] = &[("a3[p1] & a4[p2]", "!(a1[p1] & a1[p2])")];
    let mut lines = Vec::new();
    let mut ok = true;
    for (spec, want) in [
        ("vehicle_opacity.json", vehicle),
        ("room_robustness.json", room),
    ] {
        let pb = load(spec);
        let d = decompose(&pb).unwrap();
        match compare_pairs(&pb, &d, want) {
            Ok(()) => lines.push(format!("{spec}: match")),
            Err(e) => {
                ok = false;
                lines.push(format!("{spec}: {e}"));
            }
        }
    }
    let detail = lines.join("; ");
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// criterion 3

fn eligible_pairs(pb: &Problem) -> Vec<PairEntry> {
    decompose(pb)
        .unwrap()
        .pairs
        .into_iter()
        .filter(|p| p.precheck == Precheck::Eligible)
        .collect()
}

fn printed_certificates() -> Outcome {
    let cfg = SamplerConfig {
        strategy_policy: StrategyPolicy::Report,
        ..SamplerConfig::default()
    }
    .with_tol(5e-2);
    let mut lines = Vec::new();
    let mut ok = true;
    for (spec, cand) in [
        ("vehicle_opacity.json", "vehicle_candidate.json"),
        ("room_robustness.json", "room_candidate.json"),
    ] {
        let pb = load(spec);
        let c = candidate(cand);
        for pair in eligible_pairs(&pb) {
            let r = check_ci(&c, &pair.ci, &pb.aug, &cfg).unwrap();
            let samples: usize = r
                .reports()
                .iter()
                .map(|x| x.samples_in_region)
                .min()
                .unwrap_or(0);
            let worst: Vec<String> = r
                .reports()
                .iter()
                .map(|x| {
                    format!(
                        "{:?} {:.2e}",
                        x.condition,
                        x.worst_violation.unwrap_or(f64::NAN)
                    )
                })
                .collect();
            let pass = r.passed() && samples >= 10_000;
            ok &= pass;
            lines.push(format!(
                "{spec} pair {}: {} ({}, min samples {samples})",
                pair.id,
                if pass { "ok" } else { "violated" },
                worst.join(", ")
            ));
        }
    }
    if ok {
        Outcome::Pass(lines.join("; "))
    } else {
        Outcome::Fail(lines.join("; "))
    }
}

// criterion 4

fn end_to_end() -> Outcome {
    if find_solver(None).is_none() {
        eprintln!("warning: no SDP solver found; criterion 4 skipped");
        return Outcome::Skip("no SDP solver found".into());
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for spec in ["vehicle_opacity.json", "room_robustness.json"] {
        let start = Instant::now();
        let pb = load(spec);
        let report = verify(&pb).unwrap();
        let took = start.elapsed();
        let mut problems = Vec::new();
        if !report.satisfied() {
            problems.push(format!(
                "verdict {:?}, causes {:?}",
                report.verdict, report.causes
            ));
        }
        for c in &report.certificates {
            if c.candidate.barrier.degree() > 2 {
                problems.push(format!(
                    "certificate {} has degree {}",
                    c.id,
                    c.candidate.barrier.degree()
                ));
            }
            let min_eig = c
                .gram
                .as_ref()
                .map(|g| {
                    g.blocks
                        .iter()
                        .map(|b| b.min_eigenvalue)
                        .fold(f64::INFINITY, f64::min)
                })
                .unwrap_or(f64::NEG_INFINITY);
            if min_eig < -1e-6 {
                problems.push(format!("certificate {} min eigenvalue {min_eig:.2e}", c.id));
            }
            if !c
                .checks
                .iter()
                .all(|r| r.passed() && r.reports().iter().all(|x| x.tol <= 1e-6))
            {
                problems.push(format!("certificate {} fails check_ci at 1e-6", c.id));
            }
        }
        if took > Duration::from_secs(300) {
            problems.push(format!("took {:.0}s", took.as_secs_f64()));
        }
        if problems.is_empty() {
            lines.push(format!(
                "{spec}: SATISFIED, {} certificate(s), {} oracle call(s), {:.1}s",
                report.certificates.len(),
                report.oracle_calls,
                took.as_secs_f64()
            ));
        } else {
            ok = false;
            lines.push(format!("{spec}: {}", problems.join(", ")));
        }
    }
    if ok {
        Outcome::Pass(lines.join("; "))
    } else {
        Outcome::Fail(lines.join("; "))
    }
}

// criterion 5

fn random_ltl(rng: &mut ChaCha8Rng, atoms: &[Ltl], depth: usize) -> Ltl {
    if depth == 0 || rng.random_bool(0.25) {
        return atoms[rng.random_range(0..atoms.len())].clone();
    }
    let d = depth - 1;
    match rng.random_range(0..8) {
        0 => Ltl::not(random_ltl(rng, atoms, d)),
        1 => Ltl::next(random_ltl(rng, atoms, d)),
        2 => Ltl::globally(random_ltl(rng, atoms, d)),
        3 => Ltl::eventually(random_ltl(rng, atoms, d)),
        4 => Ltl::and(random_ltl(rng, atoms, d), random_ltl(rng, atoms, d)),
        5 => Ltl::or(random_ltl(rng, atoms, d), random_ltl(rng, atoms, d)),
        6 => Ltl::until(random_ltl(rng, atoms, d), random_ltl(rng, atoms, d)),
        _ => Ltl::release(random_ltl(rng, atoms, d), random_ltl(rng, atoms, d)),
    }
}

fn random_word(rng: &mut ChaCha8Rng, atoms: &[IndexedAtom]) -> LassoWord {
    let total = rng.random_range(1..=6);
    let stem_len = rng.random_range(0..total);
    let letter = |rng: &mut ChaCha8Rng| -> Letter {
        atoms
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .cloned()
            .collect()
    };
    let stem = (0..stem_len).map(|_| letter(rng)).collect();
    let cycle = (stem_len..total).map(|_| letter(rng)).collect();
    LassoWord { stem, cycle }
}

fn translation_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let names = ["a", "b", "c"];
    let mut mismatches = Vec::new();
    let mut states = 0;
    for _ in 0..200 {
        let k = rng.random_range(1..=3);
        let atoms: Vec<IndexedAtom> = names[..k]
            .iter()
            .map(|n| IndexedAtom::new(n, &["p"]))
            .collect();
        let leaves: Vec<Ltl> = atoms.iter().map(|a| Ltl::Atom(a.clone())).collect();
        let f = random_ltl(&mut rng, &leaves, 4);
        let w = random_word(&mut rng, &atoms);
        let (aut, _) = ltl_to_nba(&f);
        states += aut.num_states();
        let truth = eval_on_word(&f, &w).unwrap();
        if aut.accepts_lasso_word(&w) != truth {
            mismatches.push(format!("{f} on {w:?}"));
        }
    }
    if mismatches.is_empty() {
        Outcome::Pass(format!(
            "200 pairs, 0 mismatches, {states} automaton states in total"
        ))
    } else {
        Outcome::Fail(format!(
            "{} mismatches, first: {}",
            mismatches.len(),
            mismatches[0]
        ))
    }
}

// criterion 6

fn sos_sanity() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let square = coefficient_match(&parse_unchecked("x^2 + 2*x + 1").unwrap(), None).unwrap();
    let motzkin_basis = vec![vec![0, 0], vec![1, 1], vec![2, 1], vec![1, 2]];
    let motzkin = coefficient_match(
        &parse_unchecked("x^4*y^2 + x^2*y^4 - 3*x^2*y^2 + 1").unwrap(),
        Some(&motzkin_basis),
    )
    .unwrap();
    for (prog, golden) in [
        (&square, "sdpa/square.dat-s"),
        (&motzkin, "sdpa/motzkin.dat-s"),
    ] {
        let same = export_sdpa(&to_sdp(prog, 0.0)) == common::read_fixture(golden);
        ok &= same;
        lines.push(format!(
            "{golden} {}",
            if same { "matches" } else { "differs" }
        ));
    }
    // X = v vᵀ with v = (1, 1) in the basis (1, x)
    let sol = import_solution(
        "0 0 0\n2 1 1 1 1\n2 1 1 2 1\n2 1 2 2 1\n",
        &to_sdp(&square, 0.0),
    )
    .unwrap();
    let explicit = validate_gram(&sol, &square, 1e-9);
    ok &= explicit.ok;
    lines.push(format!(
        "explicit Gram for (x+1)^2 {}",
        if explicit.ok { "accepted" } else { "rejected" }
    ));
    match find_solver(None) {
        None => {
            eprintln!("warning: no SDP solver found; solver parts of criterion 6 skipped");
            lines.push("solver parts skipped".into());
        }
        Some(solver) => {
            let s = solve_program(&square, &solver, 0.0, 1e-6).unwrap();
            let sq_ok = s.gram.as_ref().is_some_and(|g| g.ok);
            let m = solve_program(&motzkin, &solver, 0.0, 1e-6).unwrap();
            let mz_rejected = !m.gram.as_ref().is_some_and(|g| g.ok);
            ok &= sq_ok && mz_rejected;
            lines.push(format!(
                "solver: (x+1)^2 {:?}, Motzkin {:?}",
                s.status, m.status
            ));
        }
    }
    if ok {
        Outcome::Pass(lines.join("; "))
    } else {
        Outcome::Fail(lines.join("; "))
    }
}

// criterion 7

struct Recording(Vec<BTreeSet<(String, String)>>);

impl AbcOracle for Recording {
    fn find(&mut self, cis: &[ConditionalInvariance]) -> Result<Evidence, (Cause, Vec<String>)> {
        let set = cis
            .iter()
            .map(|ci| {
                let p = ci.provenance.as_ref().expect("provenance");
                (p.s_a.to_string(), p.s_b.to_string())
            })
            .collect();
        self.0.push(set);
        Ok(Evidence {
            candidate: CertificateCandidate {
                barrier: Polynomial::constant(-1.0),
                strategies: Default::default(),
                epsilon: 0.01,
            },
            solver_status: None,
            gram: None,
            checks: Vec::new(),
        })
    }
}

fn overlap_precheck() -> Outcome {
    let pb = load("vehicle_opacity_override.json");
    let d = decompose(&pb).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for s_a in ["a4[p1,p2]", "a1[p1] & a1[p2]"] {
        let Some(p) = d.pairs.iter().find(|p| p.s_a == s_a && p.s_b == "true") else {
            ok = false;
            lines.push(format!("({s_a}, true) not found"));
            continue;
        };
        match &p.precheck {
            Precheck::Overlap { witness } => {
                let inside = p.ci.set_a.contains(witness, 1e-9).unwrap()
                    && p.ci.set_b.contains(witness, 1e-9).unwrap()
                    && pb.aug.state_set.contains(witness, 1e-9).unwrap();
                ok &= inside;
                lines.push(format!(
                    "({s_a}, true) witness {}",
                    if inside { "valid" } else { "outside a region" }
                ));
            }
            other => {
                ok = false;
                lines.push(format!("({s_a}, true) precheck {other:?}"));
            }
        }
    }
    let mut oracle = Recording(Vec::new());
    verify_general(&pb, &mut oracle).unwrap();
    let queried: BTreeSet<&str> = oracle.0.iter().flatten().map(|(_, b)| b.as_str()).collect();
    let clean = !queried.contains("true");
    ok &= clean;
    lines.push(format!(
        "{} oracle call(s), none with a true successor: {clean}",
        oracle.0.len()
    ));
    if ok {
        Outcome::Pass(lines.join("; "))
    } else {
        Outcome::Fail(lines.join("; "))
    }
}

// criterion 8

fn trajectories() -> Outcome {
    let pb = load("vehicle_opacity.json");
    let c = candidate("vehicle_candidate.json");
    let prefix = pb.formula.quantifiers();
    let pair = eligible_pairs(&pb)
        .into_iter()
        .next()
        .expect("an eligible pair");
    let clause = &pair.ci.set_a.clauses()[0];
    let member = clause.compile(&pb.aug.state_vars).unwrap();
    let state_set = pb.aug.state_set.compile(&pb.aug.state_vars).unwrap();
    let sampler = clause
        .box_within(&pb.aug.sampling_box())
        .sampler(&pb.aug.state_vars)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut runs, mut steps, mut truncated, mut worst) = (0, 0, 0, f64::NEG_INFINITY);
    let mut violations = Vec::new();
    while runs < 50 {
        let x0 = sampler.random(&mut rng);
        if !member.contains(&x0, 0.0) || !state_set.contains(&x0, 0.0) {
            continue;
        }
        runs += 1;
        let t = simulate(&c, &pb.aug, &prefix, &x0, 100, &mut rng).unwrap();
        steps += t.states.len() - 1;
        truncated += usize::from(t.left_state_set);
        if t.states.len() > 1 {
            worst = worst.max(t.max_increase());
        }
        for x in &t.states {
            let pt = sampler.to_map(x);
            if pair.ci.set_b.contains(&pt, 0.0).unwrap() {
                violations.push(format!("entered set_B at {pt:?}"));
            }
        }
    }
    let detail = format!(
        "{runs} runs, {steps} steps, {truncated} stopped at the state-set boundary, max barrier increase {worst:.2e}"
    );
    if violations.is_empty() && worst <= 5e-2 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!(
            "{detail}; {}",
            violations
                .first()
                .map(String::as_str)
                .unwrap_or("increase above 5e-2")
        ))
    }
}
