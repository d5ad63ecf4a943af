use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Instant;

use serde::Serialize;

use super::oracle::{selection_search, AbcOracle, Attempt, CertificateRecord, SosOracle};
use super::spec::{Algorithm, Problem};
use super::{Cause, PipelineError};
use crate::abc::ConditionalInvariance;
use crate::automata::{
    enumerate_lassos, enumerate_lassos_rabin, hoa_import, ltl_to_nba, transition_pairs,
    BuchiAutomaton, Graph, Guard, HoaAutomaton, Lasso, RabinAutomaton, StateTriple,
    TranslationStats,
};
use crate::formula::{negate_to_nnf, FragmentClass};
use crate::polysys::{region_overlap_witness, SemialgebraicRegion};

/// The automaton for the negated body.
#[derive(Clone, Debug)]
pub enum NegatedAutomaton {
    Buchi {
        aut: BuchiAutomaton,
        stats: Option<TranslationStats>,
    },
    Rabin {
        aut: RabinAutomaton,
    },
}

impl NegatedAutomaton {
    pub fn graph(&self) -> &Graph {
        match self {
            NegatedAutomaton::Buchi { aut, .. } => &aut.graph,
            NegatedAutomaton::Rabin { aut } => &aut.graph,
        }
    }

    fn pruned(&self) -> NegatedAutomaton {
        match self {
            NegatedAutomaton::Buchi { aut, stats } => NegatedAutomaton::Buchi {
                aut: aut.prune(),
                stats: stats.clone(),
            },
            NegatedAutomaton::Rabin { aut } => NegatedAutomaton::Rabin { aut: aut.prune() },
        }
    }

    fn lassos(&self) -> Vec<Lasso> {
        match self {
            NegatedAutomaton::Buchi { aut, .. } => enumerate_lassos(aut),
            NegatedAutomaton::Rabin { aut } => enumerate_lassos_rabin(aut),
        }
    }
}

/// Translates the negated body, or loads the configured HOA override.
pub fn negated_automaton(problem: &Problem) -> Result<NegatedAutomaton, PipelineError> {
    match &problem.spec.options.automaton_override {
        Some(path) => {
            let path = problem.spec.resolve(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| PipelineError::Spec(format!("cannot read {}: {e}", path.display())))?;
            let hoa = hoa_import(&text)?;
            hoa.check_atoms(|a| problem.labeling.knows(a))?;
            Ok(match hoa {
                HoaAutomaton::Buchi(aut) => NegatedAutomaton::Buchi { aut, stats: None },
                HoaAutomaton::Rabin(aut) => NegatedAutomaton::Rabin { aut },
            })
        }
        None => {
            let (aut, stats) = ltl_to_nba(&negate_to_nnf(&problem.formula.body));
            Ok(NegatedAutomaton::Buchi {
                aut,
                stats: Some(stats),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Precheck {
    Eligible,
    /// One of the regions is empty inside the state set.
    Vacuous,
    /// The two regions intersect, so no certificate can separate them.
    Overlap {
        witness: BTreeMap<String, f64>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEntry {
    pub id: usize,
    pub s_a: String,
    pub s_b: String,
    /// `(lasso, position)` of every occurrence.
    pub occurrences: Vec<(usize, usize)>,
    pub triples: Vec<StateTriple>,
    pub precheck: Precheck,
    /// The initial guard implies an assumed-unreachable initial guard.
    pub assumed_unreachable: bool,
    pub ci: ConditionalInvariance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "by", rename_all = "kebab-case")]
pub enum Denial {
    Certificate {
        certificate: usize,
        pair: usize,
    },
    /// Some letter along the lasso labels an empty region.
    Vacuous {
        pair: usize,
    },
    /// The lasso starts with a letter assumed not to be initial.
    Assumption {
        pair: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct LassoEntry {
    pub id: usize,
    pub states: Vec<String>,
    pub pairs: Vec<usize>,
    /// States around each pair, parallel to `pairs`.
    pub triples: Vec<StateTriple>,
    pub rabin_pair: Option<usize>,
    pub denial: Option<Denial>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AutomatonSummary {
    pub source: String,
    pub kind: String,
    pub states: usize,
    pub edges: usize,
    pub deterministic: bool,
    pub translation: Option<TranslationStats>,
}

/// Lassos of the pruned automaton with their transition pairs and
/// pre-check results.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub automaton: AutomatonSummary,
    pub lassos: Vec<LassoEntry>,
    pub pairs: Vec<PairEntry>,
}

pub(crate) struct Analysis {
    pub graph: Graph,
    pub decomposition: Decomposition,
}

fn region_in_state_set(r: &SemialgebraicRegion, problem: &Problem) -> SemialgebraicRegion {
    r.intersect_basic(&problem.aug.state_set)
}

fn analyze(problem: &Problem, aut: &NegatedAutomaton) -> Result<Analysis, PipelineError> {
    let source = if problem.spec.options.automaton_override.is_some() {
        "override"
    } else {
        "translated"
    };
    let pruned = aut.pruned();
    let graph = pruned.graph().clone();
    let (kind, translation) = match &pruned {
        NegatedAutomaton::Buchi { stats, .. } => ("buchi", stats.clone()),
        NegatedAutomaton::Rabin { .. } => ("rabin", None),
    };
    let automaton = AutomatonSummary {
        source: source.into(),
        kind: kind.into(),
        states: graph.num_states(),
        edges: graph.edges().len(),
        deterministic: graph.is_deterministic(),
        translation,
    };
    let opts = &problem.spec.options;
    let bounds = problem.aug.sampling_box();
    let assumed = Guard::or(problem.assumed_guards.iter().cloned());
    let mut pairs: Vec<PairEntry> = Vec::new();
    let mut lassos = Vec::new();
    for (lid, lasso) in pruned.lassos().into_iter().enumerate() {
        let mut ids = Vec::new();
        let mut triples = Vec::new();
        for tp in transition_pairs(&lasso, lid) {
            let existing = pairs.iter().position(|p| {
                p.ci.provenance
                    .as_ref()
                    .is_some_and(|q| q.s_a == tp.s_a && q.s_b == tp.s_b)
            });
            let id = match existing {
                Some(id) => id,
                None => {
                    let ci = problem.labeling.pair_ci(&tp, &problem.formula)?;
                    let a = region_in_state_set(&ci.set_a, problem);
                    let b = region_in_state_set(&ci.set_b, problem);
                    let precheck = if a.provably_empty(&bounds) || b.provably_empty(&bounds) {
                        Precheck::Vacuous
                    } else {
                        match region_overlap_witness(
                            &a,
                            &b,
                            &bounds,
                            opts.overlap_budget,
                            opts.sampler.seed,
                        )? {
                            Some(witness) => Precheck::Overlap { witness },
                            None => Precheck::Eligible,
                        }
                    };
                    let assumed_unreachable =
                        !problem.assumed_guards.is_empty() && tp.s_a.implies(&assumed);
                    pairs.push(PairEntry {
                        id: pairs.len(),
                        s_a: tp.s_a.to_string(),
                        s_b: tp.s_b.to_string(),
                        occurrences: Vec::new(),
                        triples: Vec::new(),
                        precheck,
                        assumed_unreachable,
                        ci,
                    });
                    pairs.len() - 1
                }
            };
            pairs[id].occurrences.push((lid, tp.position));
            if !pairs[id].triples.contains(&tp.triple) {
                pairs[id].triples.push(tp.triple);
            }
            ids.push(id);
            triples.push(tp.triple);
        }
        let denial = if let Some(&p) = ids
            .iter()
            .find(|&&p| pairs[p].precheck == Precheck::Vacuous)
        {
            Some(Denial::Vacuous { pair: p })
        } else if ids.first().is_some_and(|&p| pairs[p].assumed_unreachable) {
            Some(Denial::Assumption { pair: ids[0] })
        } else {
            None
        };
        lassos.push(LassoEntry {
            id: lid,
            states: lasso.states().iter().map(|&q| graph.name(q)).collect(),
            pairs: ids,
            triples,
            rabin_pair: lasso.pair_index,
            denial,
        });
    }
    Ok(Analysis {
        graph,
        decomposition: Decomposition {
            automaton,
            lassos,
            pairs,
        },
    })
}

/// Builds the automaton and lists lassos, pairs and pre-checks.
pub fn decompose(problem: &Problem) -> Result<Decomposition, PipelineError> {
    Ok(analyze(problem, &negated_automaton(problem)?)?.decomposition)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerificationVerdict {
    Satisfied,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub verdict: VerificationVerdict,
    /// Satisfied without any certificate because no lasso exists.
    pub vacuous: bool,
    pub algorithm: Algorithm,
    pub formula: String,
    pub fragment: FragmentClass,
    pub automaton: AutomatonSummary,
    pub lassos: Vec<LassoEntry>,
    pub pairs: Vec<PairEntry>,
    pub certificates: Vec<CertificateRecord>,
    pub attempts: Vec<Attempt>,
    pub causes: Vec<Cause>,
    pub oracle_calls: usize,
    pub notes: Vec<String>,
    pub elapsed_ms: u64,
}

impl VerificationReport {
    pub fn satisfied(&self) -> bool {
        self.verdict == VerificationVerdict::Satisfied
    }

    pub fn exit_code(&self) -> i32 {
        if self.satisfied() {
            0
        } else {
            2
        }
    }
}

/// Memoized oracle queries keyed by pair sets.
struct Session<'o> {
    oracle: &'o mut dyn AbcOracle,
    memo: BTreeMap<BTreeSet<usize>, Option<usize>>,
    certificates: Vec<CertificateRecord>,
    attempts: Vec<Attempt>,
    calls: usize,
}

impl Session<'_> {
    fn query(&mut self, set: &BTreeSet<usize>, pairs: &[PairEntry]) -> Option<usize> {
        if let Some(r) = self.memo.get(set) {
            return *r;
        }
        self.calls += 1;
        let cis: Vec<ConditionalInvariance> = set.iter().map(|&p| pairs[p].ci.clone()).collect();
        let ids: Vec<usize> = set.iter().copied().collect();
        let result = match self.oracle.find(&cis) {
            Ok(ev) => {
                let id = self.certificates.len();
                self.certificates.push(CertificateRecord {
                    id,
                    pairs: ids.clone(),
                    candidate: ev.candidate,
                    solver_status: ev.solver_status,
                    gram: ev.gram,
                    checks: ev.checks,
                });
                self.attempts.push(Attempt {
                    pairs: ids,
                    success: true,
                    cause: None,
                    detail: Vec::new(),
                });
                Some(id)
            }
            Err((cause, detail)) => {
                self.attempts.push(Attempt {
                    pairs: ids,
                    success: false,
                    cause: Some(cause),
                    detail,
                });
                None
            }
        };
        self.memo.insert(set.clone(), result);
        result
    }
}

fn finish(
    problem: &Problem,
    algorithm: Algorithm,
    analysis: Analysis,
    session: Session<'_>,
    mut causes: Vec<Cause>,
    notes: Vec<String>,
    start: Instant,
) -> VerificationReport {
    let d = analysis.decomposition;
    let all_denied = d.lassos.iter().all(|l| l.denial.is_some());
    let satisfied = all_denied && !causes.contains(&Cause::NondeterministicAutomaton);
    if !satisfied {
        for a in &session.attempts {
            if let Some(c) = &a.cause {
                causes.push(c.clone());
            }
        }
    }
    causes.sort();
    causes.dedup();
    VerificationReport {
        verdict: if satisfied {
            VerificationVerdict::Satisfied
        } else {
            VerificationVerdict::Inconclusive
        },
        vacuous: satisfied && d.lassos.is_empty(),
        algorithm,
        formula: problem.formula.to_string(),
        fragment: problem.formula.classify(),
        automaton: d.automaton,
        lassos: d.lassos,
        pairs: d.pairs,
        certificates: session.certificates,
        attempts: session.attempts,
        causes: if satisfied { Vec::new() } else { causes },
        oracle_calls: session.calls,
        notes,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

fn eligible_pairs(l: &LassoEntry, pairs: &[PairEntry]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for &p in &l.pairs {
        if pairs[p].precheck == Precheck::Eligible && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// One common certificate for one eligible pair per lasso.
pub fn verify_general(
    problem: &Problem,
    oracle: &mut dyn AbcOracle,
) -> Result<VerificationReport, PipelineError> {
    let start = Instant::now();
    let aut = negated_automaton(problem)?;
    let mut analysis = analyze(problem, &aut)?;
    let mut session = Session {
        oracle,
        memo: BTreeMap::new(),
        certificates: Vec::new(),
        attempts: Vec::new(),
        calls: 0,
    };
    let mut causes = Vec::new();
    let mut notes = Vec::new();
    let d = &mut analysis.decomposition;
    let live: Vec<usize> = d
        .lassos
        .iter()
        .filter(|l| l.denial.is_none())
        .map(|l| l.id)
        .collect();
    let eligible: Vec<Vec<usize>> = live
        .iter()
        .map(|&l| eligible_pairs(&d.lassos[l], &d.pairs))
        .collect();
    for (k, e) in eligible.iter().enumerate() {
        if e.is_empty() {
            causes.push(Cause::NoPair { lasso: live[k] });
        }
    }
    if d.lassos.is_empty() {
        notes.push("the automaton for the negated body has no lasso".into());
    }
    if causes.is_empty() && !live.is_empty() {
        let pairs = d.pairs.clone();
        let budget = problem.spec.options.selection_budget;
        let mut found = None;
        let res = selection_search(&eligible, budget, |set| {
            found = session.query(set, &pairs);
            found.is_some()
        });
        if res.exhausted_budget {
            causes.push(Cause::BudgetExhausted);
        }
        if let (Some(sel), Some(cert)) = (res.selection, found) {
            for (&l, &p) in live.iter().zip(&sel) {
                d.lassos[l].denial = Some(Denial::Certificate {
                    certificate: cert,
                    pair: p,
                });
            }
        }
    }
    Ok(finish(
        problem,
        Algorithm::General,
        analysis,
        session,
        causes,
        notes,
        start,
    ))
}

/// Per-state certificates along a breadth-first traversal; a certificate
/// found at state `r` denies every lasso through the covered state triples.
fn deny_by_traversal(
    problem: &Problem,
    analysis: &mut Analysis,
    session: &mut Session<'_>,
    causes: &mut Vec<Cause>,
) {
    let budget = problem.spec.options.selection_budget;
    let graph = &analysis.graph;
    let d = &mut analysis.decomposition;
    if graph.is_empty() {
        return;
    }
    let mut visited = BTreeSet::from([graph.initial()]);
    let mut frontier = VecDeque::from([graph.initial()]);
    let mut exhausted = false;
    while let Some(r) = frontier.pop_front() {
        if d.lassos.iter().all(|l| l.denial.is_some()) {
            break;
        }
        let succ: Vec<usize> = graph.successors(r).map(|e| e.dst).collect();
        for r1 in succ {
            if visited.insert(r1) {
                frontier.push_back(r1);
            }
            // eligible pairs at triples (r, r1, _) on live lassos
            let mut s: Vec<usize> = Vec::new();
            for l in d.lassos.iter().filter(|l| l.denial.is_none()) {
                for (&p, t) in l.pairs.iter().zip(&l.triples) {
                    if t.0 == r
                        && t.1 == r1
                        && d.pairs[p].precheck == Precheck::Eligible
                        && !s.contains(&p)
                    {
                        s.push(p);
                    }
                }
            }
            if s.is_empty() {
                continue;
            }
            s.sort_unstable();
            let Some((cert, subset)) = greedy_subset(&s, session, &d.pairs, budget, &mut exhausted)
            else {
                continue;
            };
            for l in d.lassos.iter_mut().filter(|l| l.denial.is_none()) {
                let hit = l
                    .pairs
                    .iter()
                    .zip(&l.triples)
                    .find(|(p, t)| t.0 == r && t.1 == r1 && subset.contains(p));
                if let Some((&p, _)) = hit {
                    l.denial = Some(Denial::Certificate {
                        certificate: cert,
                        pair: p,
                    });
                }
            }
        }
    }
    if exhausted {
        causes.push(Cause::BudgetExhausted);
    }
    for l in &d.lassos {
        if l.denial.is_none() && eligible_pairs(l, &d.pairs).is_empty() {
            causes.push(Cause::NoPair { lasso: l.id });
        }
    }
}

/// Tries all of `s`, then subsets with one pair removed, shrinking from the
/// end when none succeeds.
fn greedy_subset(
    s: &[usize],
    session: &mut Session<'_>,
    pairs: &[PairEntry],
    budget: usize,
    exhausted: &mut bool,
) -> Option<(usize, Vec<usize>)> {
    let mut current: Vec<usize> = s.to_vec();
    while !current.is_empty() {
        let mut candidates = vec![current.clone()];
        if current.len() > 1 {
            for k in 0..current.len() {
                let mut c = current.clone();
                c.remove(k);
                candidates.push(c);
            }
        }
        for c in candidates {
            let set: BTreeSet<usize> = c.iter().copied().collect();
            if !session.memo.contains_key(&set) && session.calls >= budget {
                *exhausted = true;
                return None;
            }
            if let Some(cert) = session.query(&set, pairs) {
                return Some((cert, c));
            }
        }
        current.pop();
    }
    None
}

/// Per-lasso certificates for `∀*∃*` prefixes; needs a deterministic automaton.
pub fn verify_forall_exists(
    problem: &Problem,
    oracle: &mut dyn AbcOracle,
) -> Result<VerificationReport, PipelineError> {
    let aut = negated_automaton(problem)?;
    verify_by_traversal(problem, oracle, aut, Algorithm::ForallExists)
}

/// Per-lasso certificates for a deterministic Rabin automaton given as the
/// HOA override.
pub fn verify_rabin(
    problem: &Problem,
    oracle: &mut dyn AbcOracle,
) -> Result<VerificationReport, PipelineError> {
    let aut = match negated_automaton(problem)? {
        NegatedAutomaton::Buchi { aut, .. } => NegatedAutomaton::Rabin {
            aut: RabinAutomaton::from_buchi(&aut),
        },
        r => r,
    };
    verify_by_traversal(problem, oracle, aut, Algorithm::Rabin)
}

fn verify_by_traversal(
    problem: &Problem,
    oracle: &mut dyn AbcOracle,
    aut: NegatedAutomaton,
    algorithm: Algorithm,
) -> Result<VerificationReport, PipelineError> {
    let start = Instant::now();
    let mut analysis = analyze(problem, &aut)?;
    let mut session = Session {
        oracle,
        memo: BTreeMap::new(),
        certificates: Vec::new(),
        attempts: Vec::new(),
        calls: 0,
    };
    let mut causes = Vec::new();
    let mut notes = Vec::new();
    if problem
        .formula
        .classify()
        .forall_exists_split(problem.formula.prefix.len())
        .is_none()
    {
        return Err(PipelineError::Spec(format!(
            "per-lasso certificates need a forall*exists* prefix, got {}",
            problem.formula
        )));
    }
    if analysis.decomposition.lassos.is_empty() {
        notes.push("the automaton for the negated body has no lasso".into());
    }
    if !analysis.graph.is_deterministic() {
        causes.push(Cause::NondeterministicAutomaton);
        notes.push("the pruned automaton is nondeterministic; use the general algorithm or supply a deterministic HOA override".into());
    } else {
        deny_by_traversal(problem, &mut analysis, &mut session, &mut causes);
    }
    Ok(finish(
        problem, algorithm, analysis, session, causes, notes, start,
    ))
}

/// Runs the algorithm selected in the options with the SOS oracle.
pub fn verify(problem: &Problem) -> Result<VerificationReport, PipelineError> {
    let mut oracle = SosOracle::new(problem);
    verify_with(problem, &mut oracle)
}

pub fn verify_with(
    problem: &Problem,
    oracle: &mut dyn AbcOracle,
) -> Result<VerificationReport, PipelineError> {
    match problem.spec.options.algorithm {
        Algorithm::General => verify_general(problem, oracle),
        Algorithm::ForallExists => verify_forall_exists(problem, oracle),
        Algorithm::Rabin => verify_rabin(problem, oracle),
        Algorithm::Auto => match negated_automaton(problem)? {
            NegatedAutomaton::Rabin { .. } => verify_rabin(problem, oracle),
            NegatedAutomaton::Buchi { .. } => verify_general(problem, oracle),
        },
    }
}
