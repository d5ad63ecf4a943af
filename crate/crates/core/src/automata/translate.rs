//! LTL to Büchi translation.
//!
//! Tableau over obligation sets producing a transition-based generalized
//! Büchi automaton (one acceptance set per until-subformula), followed by
//! counter degeneralization, trimming and bisimulation merging.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::{BuchiAutomaton, Edge, Graph, Guard, StateId};
use crate::formula::{nnf, to_basis, Ltl};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TranslationStats {
    pub tableau_states: usize,
    pub acceptance_sets: usize,
    pub degeneralized_states: usize,
    pub final_states: usize,
}

type Obligations = BTreeSet<Ltl>;

#[derive(Clone, Debug)]
struct Branch {
    guard: Vec<Guard>,
    next: Obligations,
    postponed: BTreeSet<Ltl>,
    seen: BTreeSet<Ltl>,
}

fn expand(todo: Vec<Ltl>, branch: Branch, out: &mut Vec<Branch>) {
    let mut todo = todo;
    let mut b = branch;
    while let Some(f) = todo.pop() {
        if !b.seen.insert(f.clone()) {
            continue;
        }
        if f.is_propositional() {
            let g = Guard::from_ltl(&f).expect("propositional");
            if g == Guard::False {
                return;
            }
            b.guard.push(g);
            if !Guard::and(b.guard.clone()).is_satisfiable() {
                return;
            }
            continue;
        }
        match &f {
            Ltl::And(x, y) => {
                todo.push((**y).clone());
                todo.push((**x).clone());
            }
            Ltl::Or(x, y) => {
                let (first, second) = if x.is_propositional() || !y.is_propositional() {
                    (x, y)
                } else {
                    (y, x)
                };
                let mut left = todo.clone();
                left.push((**first).clone());
                expand(left, b.clone(), out);
                let mut right = todo;
                right.push((**second).clone());
                if first.is_propositional() {
                    right.push(nnf(&Ltl::not((**first).clone())));
                }
                expand(right, b, out);
                return;
            }
            Ltl::Next(x) => {
                b.next.insert((**x).clone());
            }
            Ltl::Until(x, y) => {
                let mut now = todo.clone();
                now.push((**y).clone());
                expand(now, b.clone(), out);
                let mut later = todo;
                later.push((**x).clone());
                if y.is_propositional() {
                    later.push(nnf(&Ltl::not((**y).clone())));
                }
                b.postponed.insert(f.clone());
                b.next.insert(f.clone());
                expand(later, b, out);
                return;
            }
            Ltl::Release(x, y) => {
                let mut now = todo.clone();
                now.push((**y).clone());
                now.push((**x).clone());
                expand(now, b.clone(), out);
                let mut later = todo;
                later.push((**y).clone());
                if x.is_propositional() {
                    later.push(nnf(&Ltl::not((**x).clone())));
                }
                b.next.insert(f.clone());
                expand(later, b, out);
                return;
            }
            Ltl::Globally(_) | Ltl::Eventually(_) | Ltl::Implies(..) | Ltl::Not(_) => {
                todo.push(to_basis(&f));
                b.seen.remove(&f);
                // to_basis is a fixpoint on basis formulas, so this cannot loop
                if todo.last() == Some(&f) {
                    unreachable!("non-basis formula {f}");
                }
            }
            Ltl::True | Ltl::False | Ltl::Atom(_) => unreachable!("propositional"),
        }
    }
    out.push(b);
}

fn untils(f: &Ltl, out: &mut BTreeSet<Ltl>) {
    match f {
        Ltl::Until(a, b) => {
            out.insert(f.clone());
            untils(a, out);
            untils(b, out);
        }
        Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Release(a, b) | Ltl::Implies(a, b) => {
            untils(a, out);
            untils(b, out);
        }
        Ltl::Next(a) | Ltl::Not(a) | Ltl::Globally(a) | Ltl::Eventually(a) => untils(a, out),
        Ltl::True | Ltl::False | Ltl::Atom(_) => {}
    }
}

struct Tgba {
    initial: usize,
    /// (src, guard, dst, acceptance sets the edge belongs to)
    edges: Vec<(usize, Guard, usize, BTreeSet<usize>)>,
    states: usize,
    sets: usize,
}

fn tableau(body: &Ltl) -> Tgba {
    let mut all_untils = BTreeSet::new();
    untils(body, &mut all_untils);
    let untils: Vec<Ltl> = all_untils.into_iter().collect();
    let mut ids: BTreeMap<Obligations, usize> = BTreeMap::new();
    let init: Obligations = BTreeSet::from([body.clone()]);
    ids.insert(init.clone(), 0);
    let mut queue = VecDeque::from([init]);
    let mut edges = Vec::new();
    while let Some(state) = queue.pop_front() {
        let src = ids[&state];
        let mut branches = Vec::new();
        let empty = Branch {
            guard: Vec::new(),
            next: BTreeSet::new(),
            postponed: BTreeSet::new(),
            seen: BTreeSet::new(),
        };
        expand(state.iter().rev().cloned().collect(), empty, &mut branches);
        for br in branches {
            let n = ids.len();
            let dst = *ids.entry(br.next.clone()).or_insert_with(|| {
                queue.push_back(br.next.clone());
                n
            });
            let acc = untils
                .iter()
                .enumerate()
                .filter(|(_, u)| !br.postponed.contains(*u))
                .map(|(i, _)| i)
                .collect();
            edges.push((src, Guard::and(br.guard), dst, acc));
        }
    }
    Tgba {
        initial: 0,
        edges,
        states: ids.len(),
        sets: untils.len(),
    }
}

/// Counter degeneralization: level `k` (all sets seen) marks acceptance.
fn degeneralize(t: &Tgba) -> BuchiAutomaton {
    let k = t.sets;
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    ids.insert((t.initial, 0), 0);
    let mut queue = VecDeque::from([(t.initial, 0)]);
    let mut edges = Vec::new();
    while let Some((q, level)) = queue.pop_front() {
        let src = ids[&(q, level)];
        let start = if level == k { 0 } else { level };
        for (s, g, d, acc) in &t.edges {
            if *s != q {
                continue;
            }
            let mut l = start;
            while l < k && acc.contains(&l) {
                l += 1;
            }
            let n = ids.len();
            let dst = *ids.entry((*d, l)).or_insert_with(|| {
                queue.push_back((*d, l));
                n
            });
            edges.push(Edge {
                src,
                guard: g.clone(),
                dst,
            });
        }
    }
    let accepting = ids
        .iter()
        .filter(|((_, l), _)| *l == k)
        .map(|(_, &id)| id)
        .collect();
    let graph = Graph::new(ids.len(), 0, edges).expect("ids in range");
    BuchiAutomaton::new(graph, accepting).expect("ids in range")
}

/// Merges states with equal acceptance and equal outgoing behavior up to
/// the current partition.
fn merge_bisimilar(aut: &BuchiAutomaton) -> BuchiAutomaton {
    let n = aut.num_states();
    if n == 0 {
        return aut.clone();
    }
    let mut block: Vec<usize> = (0..n)
        .map(|q| usize::from(aut.accepting.contains(&q)))
        .collect();
    loop {
        let mut sigs: BTreeMap<(usize, Vec<(usize, String)>), usize> = BTreeMap::new();
        let mut next = vec![0; n];
        for q in 0..n {
            let mut out: BTreeMap<usize, Vec<Guard>> = BTreeMap::new();
            for e in aut.graph.successors(q) {
                out.entry(block[e.dst]).or_default().push(e.guard.clone());
            }
            let sig: Vec<(usize, String)> = out
                .into_iter()
                .map(|(b, gs)| (b, Guard::or(gs).to_string()))
                .collect();
            let len = sigs.len();
            next[q] = *sigs.entry((block[q], sig)).or_insert(len);
        }
        let stable = sigs.len() == block.iter().collect::<BTreeSet<_>>().len();
        block = next;
        if stable {
            break;
        }
    }
    // renumber blocks in breadth-first order from the initial state
    let mut order: BTreeMap<usize, StateId> = BTreeMap::new();
    let mut queue = VecDeque::from([aut.graph.initial()]);
    let mut visited = BTreeSet::from([aut.graph.initial()]);
    while let Some(q) = queue.pop_front() {
        let len = order.len();
        order.entry(block[q]).or_insert(len);
        for e in aut.graph.successors(q) {
            if visited.insert(e.dst) {
                queue.push_back(e.dst);
            }
        }
    }
    let edges: Vec<Edge> = aut
        .graph
        .edges()
        .iter()
        .filter_map(|e| {
            Some(Edge {
                src: *order.get(&block[e.src])?,
                guard: e.guard.clone(),
                dst: *order.get(&block[e.dst])?,
            })
        })
        .collect();
    let mut dedup: Vec<Edge> = Vec::new();
    for e in edges {
        if !dedup
            .iter()
            .any(|d| d.src == e.src && d.dst == e.dst && d.guard == e.guard)
        {
            dedup.push(e);
        }
    }
    let accepting = aut
        .accepting
        .iter()
        .filter_map(|q| order.get(&block[*q]).copied())
        .collect();
    let graph = Graph::new(order.len(), 0, dedup).expect("renumbered ids in range");
    BuchiAutomaton::new(graph, accepting).expect("renumbered ids in range")
}

/// Builds a Büchi automaton accepting exactly the words satisfying `body`.
pub fn ltl_to_nba(body: &Ltl) -> (BuchiAutomaton, TranslationStats) {
    let basis = to_basis(body);
    let t = tableau(&basis);
    let gba = degeneralize(&t);
    let degeneralized_states = gba.num_states();
    let merged = merge_bisimilar(&gba.prune());
    let stats = TranslationStats {
        tableau_states: t.states,
        acceptance_sets: t.sets,
        degeneralized_states,
        final_states: merged.num_states(),
    };
    (merged, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval_on_word, IndexedAtom, LassoWord, Letter};

    fn a() -> Ltl {
        Ltl::atom("a", &["p"])
    }

    fn word(stem: &[bool], cycle: &[bool]) -> LassoWord {
        let l = |on: &bool| -> Letter {
            if *on {
                [IndexedAtom::new("a", &["p"])].into_iter().collect()
            } else {
                Letter::new()
            }
        };
        LassoWord {
            stem: stem.iter().map(l).collect(),
            cycle: cycle.iter().map(l).collect(),
        }
    }

    #[test]
    fn globally_a_is_one_state() {
        let (aut, _) = ltl_to_nba(&Ltl::globally(a()));
        assert_eq!(aut.num_states(), 1);
        assert_eq!(aut.accepting.len(), 1);
        assert_eq!(aut.graph.edges().len(), 1);
        assert_eq!(
            aut.graph.edges()[0].guard,
            Guard::lit(IndexedAtom::new("a", &["p"]), true)
        );
    }

    #[test]
    fn false_gives_empty_automaton() {
        let (aut, _) = ltl_to_nba(&Ltl::False);
        assert!(aut.is_empty());
    }

    #[test]
    fn infinitely_often_agrees_with_semantics() {
        let f = Ltl::globally(Ltl::eventually(a()));
        let (aut, _) = ltl_to_nba(&f);
        for w in [
            word(&[], &[true]),
            word(&[true], &[false]),
            word(&[false], &[false, true]),
        ] {
            assert_eq!(aut.accepts_lasso_word(&w), eval_on_word(&f, &w).unwrap());
        }
        let g = Ltl::eventually(Ltl::globally(a()));
        let (aut, _) = ltl_to_nba(&g);
        for w in [
            word(&[], &[true]),
            word(&[true], &[false]),
            word(&[false], &[false, true]),
            word(&[false], &[true]),
        ] {
            assert_eq!(aut.accepts_lasso_word(&w), eval_on_word(&g, &w).unwrap());
        }
    }
}
