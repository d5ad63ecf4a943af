//! Lassos (simple stem plus simple cycle through a target state) and the
//! consecutive transition pairs along them.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{BuchiAutomaton, Graph, Guard, RabinAutomaton, StateId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lasso {
    /// `q0 … q_a`; a single state when `q0 = q_a`.
    pub stem: Vec<StateId>,
    /// `q_a … q_a`, at least two entries.
    pub cycle: Vec<StateId>,
    pub stem_guards: Vec<Guard>,
    pub cycle_guards: Vec<Guard>,
    /// Rabin pair index for lassos of a Rabin automaton.
    pub pair_index: Option<usize>,
}

impl Lasso {
    /// States in visiting order, cycle closed: `stem ++ cycle[1..]`.
    pub fn states(&self) -> Vec<StateId> {
        self.stem.iter().chain(&self.cycle[1..]).copied().collect()
    }

    pub fn guards(&self) -> Vec<Guard> {
        self.stem_guards
            .iter()
            .chain(&self.cycle_guards)
            .cloned()
            .collect()
    }

    pub fn accepting_state(&self) -> StateId {
        self.cycle[0]
    }

    pub fn display(&self, graph: &Graph) -> String {
        let names: Vec<String> = self.states().iter().map(|&q| graph.name(q)).collect();
        format!("({})", names.join(","))
    }
}

/// States `(r, r', r'')` around a pair of consecutive edges.
pub type StateTriple = (StateId, StateId, StateId);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionPair {
    pub s_a: Guard,
    pub s_b: Guard,
    pub lasso: usize,
    pub position: usize,
    pub triple: StateTriple,
}

fn simple_paths(graph: &Graph, from: StateId, to: StateId) -> Vec<Vec<StateId>> {
    let mut out = Vec::new();
    if from == to {
        out.push(vec![from]);
        return out;
    }
    let mut path = vec![from];
    let mut on_path = BTreeSet::from([from]);
    fn dfs(
        g: &Graph,
        to: StateId,
        path: &mut Vec<StateId>,
        on_path: &mut BTreeSet<StateId>,
        out: &mut Vec<Vec<StateId>>,
    ) {
        let q = *path.last().expect("nonempty path");
        for e in g.successors(q) {
            if e.dst == to {
                let mut p = path.clone();
                p.push(to);
                out.push(p);
            } else if on_path.insert(e.dst) {
                path.push(e.dst);
                dfs(g, to, path, on_path, out);
                path.pop();
                on_path.remove(&e.dst);
            }
        }
    }
    dfs(graph, to, &mut path, &mut on_path, &mut out);
    out
}

fn simple_cycles(graph: &Graph, at: StateId) -> Vec<Vec<StateId>> {
    let mut out = Vec::new();
    for e in graph.successors(at) {
        if e.dst == at {
            out.push(vec![at, at]);
            continue;
        }
        for mut tail in simple_paths(graph, e.dst, at) {
            let mut c = vec![at];
            c.append(&mut tail);
            out.push(c);
        }
    }
    out
}

fn guards_along(graph: &Graph, states: &[StateId]) -> Vec<Guard> {
    states
        .windows(2)
        .map(|w| {
            graph
                .edge(w[0], w[1])
                .expect("path follows edges")
                .guard
                .clone()
        })
        .collect()
}

fn lassos_through(
    graph: &Graph,
    targets: &BTreeSet<StateId>,
    pair_index: Option<usize>,
) -> Vec<Lasso> {
    let mut out = Vec::new();
    if graph.is_empty() {
        return out;
    }
    for &qa in targets {
        let cycles = simple_cycles(graph, qa);
        if cycles.is_empty() {
            continue;
        }
        for stem in simple_paths(graph, graph.initial(), qa) {
            for cycle in &cycles {
                out.push(Lasso {
                    stem_guards: guards_along(graph, &stem),
                    cycle_guards: guards_along(graph, cycle),
                    stem: stem.clone(),
                    cycle: cycle.clone(),
                    pair_index,
                });
            }
        }
    }
    out
}

/// All lassos through accepting states, ordered lexicographically by
/// their state sequence.
pub fn enumerate_lassos(aut: &BuchiAutomaton) -> Vec<Lasso> {
    let mut out = lassos_through(&aut.graph, &aut.accepting, None);
    out.sort_by_cached_key(Lasso::states);
    out
}

/// Lassos whose cycle passes through a good state of some pair, listed
/// once per pair index.
pub fn enumerate_lassos_rabin(aut: &RabinAutomaton) -> Vec<Lasso> {
    let mut out = Vec::new();
    for (j, pair) in aut.pairs.iter().enumerate() {
        let mut found = lassos_through(&aut.graph, &pair.good, Some(j));
        found.sort_by_cached_key(Lasso::states);
        out.extend(found);
    }
    out
}

/// Consecutive guard pairs along `stem_guards ++ cycle_guards`, plus the
/// wrap pair (last cycle guard, first cycle guard) for cycles of length two
/// or more.
pub fn transition_pairs(lasso: &Lasso, lasso_id: usize) -> Vec<TransitionPair> {
    let guards = lasso.guards();
    let states = lasso.states();
    let mut out: Vec<TransitionPair> = guards
        .windows(2)
        .enumerate()
        .map(|(i, w)| TransitionPair {
            s_a: w[0].clone(),
            s_b: w[1].clone(),
            lasso: lasso_id,
            position: i,
            triple: (states[i], states[i + 1], states[i + 2]),
        })
        .collect();
    let c = &lasso.cycle_guards;
    if c.len() >= 2 {
        let n = lasso.cycle.len();
        out.push(TransitionPair {
            s_a: c[c.len() - 1].clone(),
            s_b: c[0].clone(),
            lasso: lasso_id,
            position: guards.len() - 1,
            triple: (lasso.cycle[n - 2], lasso.cycle[0], lasso.cycle[1]),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Edge, RabinPair};
    use crate::formula::IndexedAtom;

    fn g(n: &str) -> Guard {
        Guard::lit(IndexedAtom::new(n, &[]), true)
    }

    #[test]
    fn true_loop_has_empty_stem() {
        let graph = Graph::new(
            1,
            0,
            vec![Edge {
                src: 0,
                guard: Guard::True,
                dst: 0,
            }],
        )
        .unwrap();
        let aut = BuchiAutomaton::new(graph, BTreeSet::from([0])).unwrap();
        let ls = enumerate_lassos(&aut);
        assert_eq!(ls.len(), 1);
        assert_eq!(ls[0].stem, vec![0]);
        assert!(ls[0].stem_guards.is_empty());
        assert!(transition_pairs(&ls[0], 0).is_empty());
    }

    #[test]
    fn self_loop_gives_no_wrap_pair() {
        let graph = Graph::new(
            2,
            0,
            vec![
                Edge {
                    src: 0,
                    guard: g("g"),
                    dst: 1,
                },
                Edge {
                    src: 1,
                    guard: Guard::True,
                    dst: 1,
                },
            ],
        )
        .unwrap();
        let aut = BuchiAutomaton::new(graph, BTreeSet::from([1])).unwrap();
        let ls = enumerate_lassos(&aut);
        let pairs = transition_pairs(&ls[0], 0);
        assert_eq!(pairs.len(), 1);
        assert_eq!(
            (pairs[0].s_a.clone(), pairs[0].s_b.clone()),
            (g("g"), Guard::True)
        );
        assert_eq!(pairs[0].triple, (0, 1, 1));
    }

    #[test]
    fn long_cycle_adds_wrap_pair() {
        let graph = Graph::new(
            2,
            0,
            vec![
                Edge {
                    src: 0,
                    guard: g("x"),
                    dst: 1,
                },
                Edge {
                    src: 1,
                    guard: g("y"),
                    dst: 0,
                },
            ],
        )
        .unwrap();
        let aut = BuchiAutomaton::new(graph, BTreeSet::from([0])).unwrap();
        let ls = enumerate_lassos(&aut);
        assert_eq!(ls.len(), 1);
        assert_eq!(ls[0].states(), vec![0, 1, 0]);
        let pairs = transition_pairs(&ls[0], 0);
        assert_eq!(pairs.len(), 2);
        assert_eq!(
            (pairs[1].s_a.clone(), pairs[1].s_b.clone()),
            (g("y"), g("x"))
        );
        assert_eq!(pairs[1].triple, (1, 0, 1));
    }

    #[test]
    fn rabin_lassos() {
        let graph = Graph::new(
            3,
            0,
            vec![
                Edge {
                    src: 0,
                    guard: g("x"),
                    dst: 1,
                },
                Edge {
                    src: 1,
                    guard: g("x"),
                    dst: 1,
                },
                Edge {
                    src: 0,
                    guard: g("y"),
                    dst: 2,
                },
            ],
        )
        .unwrap();
        let one = RabinAutomaton::new(
            graph.clone(),
            vec![RabinPair {
                good: BTreeSet::from([1]),
                bad: BTreeSet::new(),
            }],
        )
        .unwrap();
        assert_eq!(enumerate_lassos_rabin(&one).len(), 1);
        let acyclic = RabinAutomaton::new(
            graph.clone(),
            vec![RabinPair {
                good: BTreeSet::from([2]),
                bad: BTreeSet::new(),
            }],
        )
        .unwrap();
        assert!(enumerate_lassos_rabin(&acyclic).is_empty());
        let two = RabinAutomaton::new(
            graph,
            vec![
                RabinPair {
                    good: BTreeSet::from([1]),
                    bad: BTreeSet::new(),
                },
                RabinPair {
                    good: BTreeSet::from([1]),
                    bad: BTreeSet::from([2]),
                },
            ],
        )
        .unwrap();
        let ls = enumerate_lassos_rabin(&two);
        assert_eq!(
            ls.iter().map(|l| l.pair_index).collect::<Vec<_>>(),
            vec![Some(0), Some(1)]
        );
    }
}
