//! Symbolic-guard Büchi and Rabin automata.

mod guard;
mod hoa;
mod lasso;
mod translate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::formula::LassoWord;

pub use guard::{Cube, Guard};
pub use hoa::{hoa_export_buchi, hoa_export_rabin, hoa_import, parse_ap_name, HoaAutomaton};
pub use lasso::{
    enumerate_lassos, enumerate_lassos_rabin, transition_pairs, Lasso, StateTriple, TransitionPair,
};
pub use translate::{ltl_to_nba, TranslationStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomatonError {
    #[error("HOA syntax error on line {line}: {msg}")]
    HoaSyntax { line: usize, msg: String },
    #[error("unsupported HOA feature: {0}")]
    Unsupported(String),
    #[error("unknown atomic proposition '{0}'")]
    UnknownAp(String),
    #[error("state {0} is out of range")]
    BadState(usize),
    #[error("automaton is not deterministic")]
    Nondeterministic,
}

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub src: StateId,
    pub guard: Guard,
    pub dst: StateId,
}

/// Transition graph shared by Büchi and Rabin automata.
///
/// Parallel edges are merged into one disjunctive guard and unsatisfiable
/// edges are dropped, so a state sequence determines its edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    names: Vec<Option<String>>,
    initial: StateId,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(
        num_states: usize,
        initial: StateId,
        edges: Vec<Edge>,
    ) -> Result<Self, AutomatonError> {
        if num_states > 0 && initial >= num_states {
            return Err(AutomatonError::BadState(initial));
        }
        let mut merged: BTreeMap<(StateId, StateId), Vec<Guard>> = BTreeMap::new();
        for e in edges {
            if e.src >= num_states {
                return Err(AutomatonError::BadState(e.src));
            }
            if e.dst >= num_states {
                return Err(AutomatonError::BadState(e.dst));
            }
            merged.entry((e.src, e.dst)).or_default().push(e.guard);
        }
        let edges = merged
            .into_iter()
            .map(|((src, dst), gs)| Edge {
                src,
                guard: Guard::or(gs),
                dst,
            })
            .filter(|e| e.guard.is_satisfiable())
            .collect();
        Ok(Graph {
            names: vec![None; num_states],
            initial,
            edges,
        })
    }

    pub fn with_names(mut self, names: Vec<Option<String>>) -> Self {
        if names.len() == self.names.len() {
            self.names = names;
        }
        self
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn name(&self, q: StateId) -> String {
        self.names
            .get(q)
            .cloned()
            .flatten()
            .unwrap_or_else(|| format!("q{q}"))
    }

    pub fn names(&self) -> &[Option<String>] {
        &self.names
    }

    pub fn successors(&self, q: StateId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.src == q)
    }

    pub fn edge(&self, src: StateId, dst: StateId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.src == src && e.dst == dst)
    }

    fn reachable_from(&self, starts: &[StateId], forward: bool) -> BTreeSet<StateId> {
        let mut seen: BTreeSet<StateId> = starts.iter().copied().collect();
        let mut queue: VecDeque<StateId> = starts.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for e in &self.edges {
                let (from, to) = if forward {
                    (e.src, e.dst)
                } else {
                    (e.dst, e.src)
                };
                if from == q && seen.insert(to) {
                    queue.push_back(to);
                }
            }
        }
        seen
    }

    /// States that lie on some cycle.
    fn on_cycle(&self, q: StateId) -> bool {
        let succ: Vec<StateId> = self.successors(q).map(|e| e.dst).collect();
        self.reachable_from(&succ, true).contains(&q)
    }

    /// Keeps states reachable from the initial state that can reach a
    /// target lying on a cycle. Returns the kept graph and the old ids.
    fn trim(&self, targets: &BTreeSet<StateId>) -> (Graph, Vec<StateId>) {
        if self.is_empty() {
            return (self.clone(), Vec::new());
        }
        let live: Vec<StateId> = targets
            .iter()
            .copied()
            .filter(|&q| self.on_cycle(q))
            .collect();
        let fwd = self.reachable_from(&[self.initial], true);
        let bwd = self.reachable_from(&live, false);
        let keep: Vec<StateId> = (0..self.num_states())
            .filter(|q| fwd.contains(q) && bwd.contains(q))
            .collect();
        if !keep.contains(&self.initial) {
            return (
                Graph {
                    names: Vec::new(),
                    initial: 0,
                    edges: Vec::new(),
                },
                Vec::new(),
            );
        }
        let index: BTreeMap<StateId, StateId> =
            keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                Some(Edge {
                    src: *index.get(&e.src)?,
                    guard: e.guard.clone(),
                    dst: *index.get(&e.dst)?,
                })
            })
            .collect();
        let names = keep.iter().map(|&q| self.names[q].clone()).collect();
        (
            Graph {
                names,
                initial: index[&self.initial],
                edges,
            },
            keep,
        )
    }

    /// Every state's outgoing guards are pairwise unsatisfiable.
    pub fn is_deterministic(&self) -> bool {
        (0..self.num_states()).all(|q| {
            let out: Vec<&Edge> = self.successors(q).collect();
            out.iter().enumerate().all(|(i, a)| {
                out[i + 1..]
                    .iter()
                    .all(|b| !Guard::and([a.guard.clone(), b.guard.clone()]).is_satisfiable())
            })
        })
    }

    /// All product nodes `(state, position)` reachable on `word`.
    fn word_product(&self, word: &LassoWord) -> BTreeMap<(StateId, usize), Vec<(StateId, usize)>> {
        let mut adj: BTreeMap<(StateId, usize), Vec<(StateId, usize)>> = BTreeMap::new();
        if self.is_empty() || word.cycle.is_empty() {
            return adj;
        }
        let start = (self.initial, 0);
        let mut queue = VecDeque::from([start]);
        adj.insert(start, Vec::new());
        while let Some((q, i)) = queue.pop_front() {
            let letter = word.letter(i);
            let j = word.succ(i);
            let next: Vec<(StateId, usize)> = self
                .successors(q)
                .filter(|e| e.guard.eval(letter))
                .map(|e| (e.dst, j))
                .collect();
            for n in &next {
                if !adj.contains_key(n) {
                    adj.insert(*n, Vec::new());
                    queue.push_back(*n);
                }
            }
            adj.insert((q, i), next);
        }
        adj
    }
}

fn reaches_itself(
    adj: &BTreeMap<(StateId, usize), Vec<(StateId, usize)>>,
    node: (StateId, usize),
) -> bool {
    reachable_nodes(adj, node, |_| true).contains(&node)
}

fn reachable_nodes<F: Fn((StateId, usize)) -> bool>(
    adj: &BTreeMap<(StateId, usize), Vec<(StateId, usize)>>,
    node: (StateId, usize),
    allowed: F,
) -> BTreeSet<(StateId, usize)> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<(StateId, usize)> = adj.get(&node).cloned().unwrap_or_default();
    while let Some(n) = stack.pop() {
        if !allowed(n) || !seen.insert(n) {
            continue;
        }
        stack.extend(adj.get(&n).into_iter().flatten().copied());
    }
    seen
}

/// Nondeterministic Büchi automaton with state-based acceptance.
#[derive(Clone, Debug, PartialEq)]
pub struct BuchiAutomaton {
    pub graph: Graph,
    pub accepting: BTreeSet<StateId>,
}

impl BuchiAutomaton {
    pub fn new(graph: Graph, accepting: BTreeSet<StateId>) -> Result<Self, AutomatonError> {
        if let Some(&q) = accepting.iter().find(|&&q| q >= graph.num_states()) {
            return Err(AutomatonError::BadState(q));
        }
        Ok(BuchiAutomaton { graph, accepting })
    }

    pub fn num_states(&self) -> usize {
        self.graph.num_states()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn is_deterministic(&self) -> bool {
        self.graph.is_deterministic()
    }

    /// Drops states that lie on no lasso together with their edges.
    pub fn prune(&self) -> BuchiAutomaton {
        let (graph, kept) = self.graph.trim(&self.accepting);
        let accepting = kept
            .iter()
            .enumerate()
            .filter(|(_, q)| self.accepting.contains(q))
            .map(|(i, _)| i)
            .collect();
        BuchiAutomaton { graph, accepting }
    }

    /// Membership of `stem · cycle^ω` via the product with the word.
    pub fn accepts_lasso_word(&self, word: &LassoWord) -> bool {
        let adj = self.graph.word_product(word);
        adj.keys()
            .any(|&(q, i)| self.accepting.contains(&q) && reaches_itself(&adj, (q, i)))
    }
}

pub fn prune(aut: &BuchiAutomaton) -> BuchiAutomaton {
    aut.prune()
}

pub fn is_deterministic(aut: &BuchiAutomaton) -> bool {
    aut.is_deterministic()
}

pub fn accepts_lasso_word(aut: &BuchiAutomaton, word: &LassoWord) -> bool {
    aut.accepts_lasso_word(word)
}

/// Rabin pair: accept when `good` is visited infinitely often and `bad` finitely often.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RabinPair {
    pub good: BTreeSet<StateId>,
    pub bad: BTreeSet<StateId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RabinAutomaton {
    pub graph: Graph,
    pub pairs: Vec<RabinPair>,
}

impl RabinAutomaton {
    pub fn new(graph: Graph, pairs: Vec<RabinPair>) -> Result<Self, AutomatonError> {
        for p in &pairs {
            if let Some(&q) = p
                .good
                .iter()
                .chain(&p.bad)
                .find(|&&q| q >= graph.num_states())
            {
                return Err(AutomatonError::BadState(q));
            }
        }
        Ok(RabinAutomaton { graph, pairs })
    }

    /// A Büchi automaton read as the single pair `(F, ∅)`.
    pub fn from_buchi(aut: &BuchiAutomaton) -> Self {
        RabinAutomaton {
            graph: aut.graph.clone(),
            pairs: vec![RabinPair {
                good: aut.accepting.clone(),
                bad: BTreeSet::new(),
            }],
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.graph.is_deterministic()
    }

    /// Trims states that cannot reach a cycle through some good state.
    pub fn prune(&self) -> RabinAutomaton {
        let goods: BTreeSet<StateId> = self
            .pairs
            .iter()
            .flat_map(|p| p.good.iter().copied())
            .collect();
        let (graph, kept) = self.graph.trim(&goods);
        let remap = |s: &BTreeSet<StateId>| -> BTreeSet<StateId> {
            kept.iter()
                .enumerate()
                .filter(|(_, q)| s.contains(q))
                .map(|(i, _)| i)
                .collect()
        };
        let pairs = self
            .pairs
            .iter()
            .map(|p| RabinPair {
                good: remap(&p.good),
                bad: remap(&p.bad),
            })
            .collect();
        RabinAutomaton { graph, pairs }
    }

    /// Membership via the word product: some reachable cycle meets `good`
    /// and avoids `bad` for one pair.
    pub fn accepts_lasso_word(&self, word: &LassoWord) -> bool {
        let adj = self.graph.word_product(word);
        self.pairs.iter().any(|pair| {
            adj.keys().any(|&(q, i)| {
                pair.good.contains(&q)
                    && !pair.bad.contains(&q)
                    && reachable_nodes(&adj, (q, i), |(s, _)| !pair.bad.contains(&s))
                        .contains(&(q, i))
            })
        })
    }
}
