//! Certificate oracles and the selection search over per-lasso pair choices.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::spec::{Problem, StrategyEncoding};
use super::Cause;
use crate::abc::{check_ci, CertificateCandidate, CiReport, ConditionalInvariance};
use crate::formula::Quantifier;
use crate::sos::{
    build_sos_program, find_solver, solve_program, strategy_candidates, GramReport, SdpSolver,
    SolverStatus, StrategySpec,
};

/// A certificate together with the evidence that accepted it.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateRecord {
    pub id: usize,
    /// Distinct pair ids the certificate covers.
    pub pairs: Vec<usize>,
    pub candidate: CertificateCandidate,
    pub solver_status: Option<SolverStatus>,
    pub gram: Option<GramReport>,
    pub checks: Vec<CiReport>,
}

/// Result of one oracle query.
#[derive(Clone, Debug, Serialize)]
pub struct Attempt {
    pub pairs: Vec<usize>,
    pub success: bool,
    pub cause: Option<Cause>,
    pub detail: Vec<String>,
}

/// Decides whether a single certificate exists for a set of conditional
/// invariances. Implementations must be sound: a returned certificate has to
/// satisfy every invariance.
pub trait AbcOracle {
    fn find(&mut self, cis: &[ConditionalInvariance]) -> Result<Evidence, (Cause, Vec<String>)>;
}

/// What an oracle returns on success.
#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    pub candidate: CertificateCandidate,
    pub solver_status: Option<SolverStatus>,
    pub gram: Option<GramReport>,
    pub checks: Vec<CiReport>,
}

/// SOS synthesis followed by the Gram check and sampled checks.
pub struct SosOracle<'a> {
    problem: &'a Problem,
    solver: Option<SdpSolver>,
}

impl<'a> SosOracle<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        let solver = find_solver(problem.spec.options.sdp_solver.as_deref());
        SosOracle { problem, solver }
    }

    pub fn with_solver(problem: &'a Problem, solver: Option<SdpSolver>) -> Self {
        SosOracle { problem, solver }
    }

    pub fn solver(&self) -> Option<&SdpSolver> {
        self.solver.as_ref()
    }

    fn strategy_specs(&self) -> Vec<BTreeMap<String, StrategySpec>> {
        let pb = self.problem;
        let prefix = pb.formula.quantifiers();
        match pb.spec.options.strategy_encoding {
            StrategyEncoding::FixedMultiplier => {
                strategy_candidates(&pb.aug, &prefix, &pb.user_strategies)
                    .into_iter()
                    .map(|m| {
                        m.into_iter()
                            .map(|(w, h)| (w, StrategySpec::Fixed(h)))
                            .collect()
                    })
                    .collect()
            }
            StrategyEncoding::LinearSlack => {
                let degree = pb.spec.options.degrees.strategy;
                let mut m = BTreeMap::new();
                for (i, q) in prefix.iter().enumerate() {
                    if *q == Quantifier::Exists {
                        for w in pb.aug.copy_input_vars(i + 1) {
                            m.insert(w, StrategySpec::Free { degree });
                        }
                    }
                }
                vec![m]
            }
        }
    }
}

fn describe(spec: &BTreeMap<String, StrategySpec>) -> String {
    let parts: Vec<String> = spec
        .iter()
        .map(|(w, s)| match s {
            StrategySpec::Fixed(h) => format!("{w} = {h}"),
            StrategySpec::Free { degree } => format!("{w} free of degree {degree}"),
        })
        .collect();
    if parts.is_empty() {
        "no strategies".into()
    } else {
        parts.join(", ")
    }
}

impl AbcOracle for SosOracle<'_> {
    fn find(&mut self, cis: &[ConditionalInvariance]) -> Result<Evidence, (Cause, Vec<String>)> {
        let Some(solver) = &self.solver else {
            return Err((
                Cause::SolverMissing,
                vec!["no SDP solver configured or found".into()],
            ));
        };
        let pb = self.problem;
        let opts = &pb.spec.options;
        let prefix = pb.formula.quantifiers();
        let cfg = opts.sampler.clone().with_tol(opts.check_tol);
        let mut log = Vec::new();
        let mut cause = Cause::SdpInfeasible;
        for spec in self.strategy_specs() {
            let label = describe(&spec);
            let prog = match build_sos_program(
                cis,
                &pb.aug,
                &prefix,
                &opts.degrees,
                opts.epsilon,
                &spec,
                true,
            ) {
                Ok(p) => p,
                Err(e) => {
                    log.push(format!("{label}: {e}"));
                    cause = Cause::SynthesisError;
                    continue;
                }
            };
            let syn = match solve_program(&prog, solver, opts.regularization, opts.gram_tol) {
                Ok(s) => s,
                Err(e) => {
                    log.push(format!("{label}: {e}"));
                    cause = Cause::SynthesisError;
                    continue;
                }
            };
            let Some(candidate) = syn.candidate else {
                match &syn.gram {
                    Some(g) => {
                        log.push(format!(
                            "{label}: Gram check failed (max residual {:.3e}, min eigenvalue {:.3e})",
                            g.max_residual,
                            g.blocks.iter().map(|b| b.min_eigenvalue).fold(f64::INFINITY, f64::min)
                        ));
                        cause = Cause::GramCheckFailed;
                    }
                    None => log.push(format!("{label}: solver status {:?}", syn.status)),
                }
                continue;
            };
            let mut checks = Vec::new();
            let mut ok = true;
            for ci in cis {
                match check_ci(&candidate, ci, &pb.aug, &cfg) {
                    Ok(r) => {
                        ok &= r.passed();
                        checks.push(r);
                    }
                    Err(e) => {
                        log.push(format!("{label}: {e}"));
                        ok = false;
                    }
                }
            }
            if ok {
                log.push(format!("{label}: certificate found"));
                return Ok(Evidence {
                    candidate,
                    solver_status: Some(syn.status),
                    gram: syn.gram,
                    checks,
                });
            }
            log.push(format!("{label}: sampled check failed"));
            cause = Cause::CheckFailed;
        }
        Err((cause, log))
    }
}

/// Outcome of [`selection_search`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionResult {
    /// Chosen pair id per lasso.
    pub selection: Option<Vec<usize>>,
    pub oracle_calls: usize,
    pub exhausted_budget: bool,
}

/// Cap on enumerated selections before sorting.
const MAX_SELECTIONS: usize = 100_000;

/// Picks one eligible pair per lasso such that `oracle` accepts the set of
/// chosen pairs. Sets are tried by increasing size, then lexicographically,
/// each at most once, for at most `budget` oracle calls.
pub fn selection_search<F>(eligible: &[Vec<usize>], budget: usize, mut oracle: F) -> SelectionResult
where
    F: FnMut(&BTreeSet<usize>) -> bool,
{
    let mut out = SelectionResult {
        selection: None,
        oracle_calls: 0,
        exhausted_budget: false,
    };
    if eligible.iter().any(Vec::is_empty) {
        return out;
    }
    // set -> one selection realizing it
    let mut sets: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
    let mut idx = vec![0usize; eligible.len()];
    'enumerate: loop {
        let sel: Vec<usize> = idx.iter().zip(eligible).map(|(&i, e)| e[i]).collect();
        sets.entry(sel.iter().copied().collect()).or_insert(sel);
        if sets.len() >= MAX_SELECTIONS {
            break;
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < eligible[k].len() {
                continue 'enumerate;
            }
            idx[k] = 0;
        }
        break;
    }
    let mut order: Vec<(BTreeSet<usize>, Vec<usize>)> = sets.into_iter().collect();
    order.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    for (set, sel) in order {
        if out.oracle_calls >= budget {
            out.exhausted_budget = true;
            return out;
        }
        out.oracle_calls += 1;
        if oracle(&set) {
            out.selection = Some(sel);
            return out;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_pair_needs_one_call() {
        let eligible = vec![vec![0, 1], vec![2, 0], vec![0]];
        let r = selection_search(&eligible, 64, |s| s.len() == 1);
        assert_eq!(r.oracle_calls, 1);
        assert_eq!(r.selection, Some(vec![0, 0, 0]));
    }

    #[test]
    fn all_infeasible_enumerates_everything() {
        let eligible = vec![vec![0, 1], vec![2, 3]];
        let r = selection_search(&eligible, 64, |_| false);
        assert_eq!(r.selection, None);
        assert_eq!(r.oracle_calls, 4);
        assert!(!r.exhausted_budget);
        let r = selection_search(&eligible, 2, |_| false);
        assert!(r.exhausted_budget);
        assert_eq!(r.oracle_calls, 2);
    }

    #[test]
    fn lasso_without_pairs_fails_immediately() {
        let r = selection_search(&[vec![0], vec![]], 64, |_| true);
        assert_eq!(r.selection, None);
        assert_eq!(r.oracle_calls, 0);
    }

    #[test]
    fn smaller_sets_first() {
        let eligible = vec![vec![0, 1], vec![2, 1]];
        let mut seen = Vec::new();
        selection_search(&eligible, 64, |s| {
            seen.push(s.clone());
            false
        });
        assert_eq!(seen[0], BTreeSet::from([1]));
        assert!(seen[1..].iter().all(|s| s.len() == 2));
    }
}
