//! Propositional edge guards over indexed atoms.

use std::collections::BTreeSet;
use std::fmt;

use crate::formula::{IndexedAtom, Letter, Ltl};

/// Boolean formula over indexed atoms, kept in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    True,
    False,
    Lit(IndexedAtom, bool),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

/// A conjunction of literals; `true` means positive.
pub type Cube = Vec<(IndexedAtom, bool)>;

impl Guard {
    pub fn lit(atom: IndexedAtom, positive: bool) -> Guard {
        Guard::Lit(atom, positive)
    }

    pub fn and(parts: impl IntoIterator<Item = Guard>) -> Guard {
        let mut out: Vec<Guard> = Vec::new();
        for p in parts {
            match p {
                Guard::True => {}
                Guard::False => return Guard::False,
                Guard::And(inner) => {
                    for g in inner {
                        if !out.contains(&g) {
                            out.push(g);
                        }
                    }
                }
                g => {
                    if !out.contains(&g) {
                        out.push(g);
                    }
                }
            }
        }
        match out.len() {
            0 => Guard::True,
            1 => out.pop().expect("one element"),
            _ => Guard::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Guard>) -> Guard {
        let mut out: Vec<Guard> = Vec::new();
        for p in parts {
            match p {
                Guard::False => {}
                Guard::True => return Guard::True,
                Guard::Or(inner) => {
                    for g in inner {
                        if !out.contains(&g) {
                            out.push(g);
                        }
                    }
                }
                g => {
                    if !out.contains(&g) {
                        out.push(g);
                    }
                }
            }
        }
        match out.len() {
            0 => Guard::False,
            1 => out.pop().expect("one element"),
            _ => Guard::Or(out),
        }
    }

    pub fn negate(&self) -> Guard {
        match self {
            Guard::True => Guard::False,
            Guard::False => Guard::True,
            Guard::Lit(a, s) => Guard::Lit(a.clone(), !s),
            Guard::And(gs) => Guard::or(gs.iter().map(Guard::negate)),
            Guard::Or(gs) => Guard::and(gs.iter().map(Guard::negate)),
        }
    }

    /// Converts a propositional LTL formula. Returns `None` for temporal ones.
    pub fn from_ltl(f: &Ltl) -> Option<Guard> {
        Some(match f {
            Ltl::True => Guard::True,
            Ltl::False => Guard::False,
            Ltl::Atom(a) => Guard::Lit(a.clone(), true),
            Ltl::Not(a) => Guard::from_ltl(a)?.negate(),
            Ltl::And(a, b) => Guard::and([Guard::from_ltl(a)?, Guard::from_ltl(b)?]),
            Ltl::Or(a, b) => Guard::or([Guard::from_ltl(a)?, Guard::from_ltl(b)?]),
            Ltl::Implies(a, b) => Guard::or([Guard::from_ltl(a)?.negate(), Guard::from_ltl(b)?]),
            _ => return None,
        })
    }

    pub fn atoms(&self) -> BTreeSet<IndexedAtom> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<IndexedAtom>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Lit(a, _) => {
                out.insert(a.clone());
            }
            Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| g.collect(out)),
        }
    }

    pub fn eval(&self, letter: &Letter) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Lit(a, s) => letter.contains(a) == *s,
            Guard::And(gs) => gs.iter().all(|g| g.eval(letter)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(letter)),
        }
    }

    /// Partial evaluation under a single atom assignment.
    fn assign(&self, atom: &IndexedAtom, value: bool) -> Guard {
        match self {
            Guard::Lit(a, s) if a == atom => {
                if value == *s {
                    Guard::True
                } else {
                    Guard::False
                }
            }
            Guard::And(gs) => Guard::and(gs.iter().map(|g| g.assign(atom, value))),
            Guard::Or(gs) => Guard::or(gs.iter().map(|g| g.assign(atom, value))),
            g => g.clone(),
        }
    }

    /// Satisfiability by splitting on atoms with simplification.
    pub fn is_satisfiable(&self) -> bool {
        match self {
            Guard::True | Guard::Lit(..) => true,
            Guard::False => false,
            _ => {
                if let Guard::Or(gs) = self {
                    return gs.iter().any(Guard::is_satisfiable);
                }
                let atom = self.first_atom().expect("compound guard has atoms");
                self.assign(&atom, true).is_satisfiable()
                    || self.assign(&atom, false).is_satisfiable()
            }
        }
    }

    fn first_atom(&self) -> Option<IndexedAtom> {
        match self {
            Guard::Lit(a, _) => Some(a.clone()),
            Guard::And(gs) | Guard::Or(gs) => gs.iter().find_map(Guard::first_atom),
            _ => None,
        }
    }

    pub fn implies(&self, other: &Guard) -> bool {
        !Guard::and([self.clone(), other.negate()]).is_satisfiable()
    }

    pub fn equivalent(&self, other: &Guard) -> bool {
        self.implies(other) && other.implies(self)
    }

    /// Disjunctive normal form with contradictory cubes dropped.
    pub fn cubes(&self) -> Vec<Cube> {
        let raw: Vec<Cube> = match self {
            Guard::True => vec![Vec::new()],
            Guard::False => Vec::new(),
            Guard::Lit(a, s) => vec![vec![(a.clone(), *s)]],
            Guard::Or(gs) => gs.iter().flat_map(Guard::cubes).collect(),
            Guard::And(gs) => {
                let mut acc: Vec<Cube> = vec![Vec::new()];
                for g in gs {
                    let cs = g.cubes();
                    let mut next = Vec::new();
                    for a in &acc {
                        for c in &cs {
                            let mut merged = a.clone();
                            merged.extend(c.iter().cloned());
                            next.push(merged);
                        }
                    }
                    acc = next;
                }
                acc
            }
        };
        let mut out: Vec<Cube> = Vec::new();
        for mut cube in raw {
            cube.sort();
            cube.dedup();
            if cube.windows(2).any(|w| w[0].0 == w[1].0) {
                continue;
            }
            if !out.contains(&cube) {
                out.push(cube);
            }
        }
        out
    }

    /// Compact rendering: the positive literals of a cube when it has any.
    pub fn label(&self) -> String {
        if let [cube] = self.cubes().as_slice() {
            let pos: Vec<String> = cube
                .iter()
                .filter(|(_, s)| *s)
                .map(|(a, _)| render_atom(a))
                .collect();
            if !pos.is_empty() {
                return pos.join(" & ");
            }
        }
        self.to_string()
    }
}

fn render_atom(a: &IndexedAtom) -> String {
    if a.traces.is_empty() {
        a.name.clone()
    } else {
        a.to_string()
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => write!(f, "true"),
            Guard::False => write!(f, "false"),
            Guard::Lit(a, true) => write!(f, "{}", render_atom(a)),
            Guard::Lit(a, false) => write!(f, "!{}", render_atom(a)),
            Guard::And(gs) | Guard::Or(gs) => {
                let sep = if matches!(self, Guard::And(_)) {
                    " & "
                } else {
                    " | "
                };
                let parts: Vec<String> = gs
                    .iter()
                    .map(|g| match g {
                        Guard::And(_) | Guard::Or(_) => format!("({g})"),
                        _ => g.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join(sep))
            }
        }
    }
}

impl serde::Serialize for Guard {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Guard {
        Guard::lit(IndexedAtom::new(n, &["p"]), true)
    }

    #[test]
    fn smart_constructors_simplify() {
        assert_eq!(Guard::and([Guard::True, a("x")]), a("x"));
        assert_eq!(Guard::or([Guard::False, Guard::False]), Guard::False);
        assert_eq!(Guard::and([a("x"), Guard::False]), Guard::False);
        assert_eq!(
            Guard::and([a("x"), Guard::and([a("y"), a("x")])]),
            Guard::And(vec![a("x"), a("y")])
        );
    }

    #[test]
    fn satisfiability_and_implication() {
        let x = a("x");
        assert!(!Guard::and([x.clone(), x.negate()]).is_satisfiable());
        assert!(Guard::or([x.clone(), x.negate()]).equivalent(&Guard::True));
        let xy = Guard::and([x.clone(), a("y")]);
        assert!(xy.implies(&x));
        assert!(!x.implies(&xy));
        let excl = Guard::and([Guard::or([x.clone(), a("y")]), x.negate(), a("y").negate()]);
        assert!(!excl.is_satisfiable());
    }

    #[test]
    fn cubes_drop_contradictions() {
        let g = Guard::and([Guard::or([a("x"), a("y")]), a("x").negate()]);
        let cubes = g.cubes();
        assert_eq!(cubes.len(), 1);
        assert_eq!(cubes[0].len(), 2);
    }

    #[test]
    fn label_shows_positive_part() {
        let g = Guard::and([a("x"), a("y").negate()]);
        assert_eq!(g.label(), "x[p]");
        assert_eq!(Guard::True.label(), "true");
        assert_eq!(a("y").negate().label(), "!y[p]");
    }
}
