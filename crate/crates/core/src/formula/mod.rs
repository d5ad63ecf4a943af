//! HyperLTL formulas in prenex form.

mod parse;
mod semantics;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_hyperltl, parse_ltl_body, AtomDecls};
pub use semantics::{eval_on_lasso_traces, eval_on_word, LassoWord, Letter, Trace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("trace variable '{0}' is not bound by the quantifier prefix")]
    UnboundTrace(String),
    #[error("trace variable '{0}' is quantified twice")]
    DuplicateTrace(String),
    #[error("atom '{name}' takes {expected} trace argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("atom '{0}' is not declared")]
    UnknownAtom(String),
    #[error("joint atom '{0}' must be applied to distinct trace variables")]
    RepeatedTraceArgument(String),
    #[error("quantifier inside the formula body at byte {0}; only prenex form is supported")]
    QuantifierInBody(usize),
    #[error("alphabet mismatch: {0}")]
    Alphabet(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Forall,
    Exists,
}

/// Atom applied to trace variables, e.g. `a3[p1,p2]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexedAtom {
    pub name: String,
    pub traces: Vec<String>,
}

impl IndexedAtom {
    pub fn new(name: &str, traces: &[&str]) -> Self {
        IndexedAtom {
            name: name.to_string(),
            traces: traces.iter().map(|t| t.to_string()).collect(),
        }
    }
}

impl fmt::Display for IndexedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.traces.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}[{}]", self.name, self.traces.join(","))
        }
    }
}

/// LTL body over indexed atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(IndexedAtom),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
    Globally(Box<Ltl>),
    Eventually(Box<Ltl>),
}

use Ltl::*;

impl Ltl {
    pub fn atom(name: &str, traces: &[&str]) -> Ltl {
        Atom(IndexedAtom::new(name, traces))
    }
    pub fn not(a: Ltl) -> Ltl {
        Not(Box::new(a))
    }
    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Ltl, b: Ltl) -> Ltl {
        Implies(Box::new(a), Box::new(b))
    }
    pub fn next(a: Ltl) -> Ltl {
        Next(Box::new(a))
    }
    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Until(Box::new(a), Box::new(b))
    }
    pub fn release(a: Ltl, b: Ltl) -> Ltl {
        Release(Box::new(a), Box::new(b))
    }
    pub fn globally(a: Ltl) -> Ltl {
        Globally(Box::new(a))
    }
    pub fn eventually(a: Ltl) -> Ltl {
        Eventually(Box::new(a))
    }

    pub fn atoms(&self) -> BTreeSet<IndexedAtom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<IndexedAtom>) {
        match self {
            True | False => {}
            Atom(a) => {
                out.insert(a.clone());
            }
            Not(a) | Next(a) | Globally(a) | Eventually(a) => a.collect_atoms(out),
            And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) | Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Number of nested operators above the atoms.
    pub fn depth(&self) -> usize {
        match self {
            True | False | Atom(_) => 0,
            Not(a) | Next(a) | Globally(a) | Eventually(a) => 1 + a.depth(),
            And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) | Release(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// True when no temporal operator occurs.
    pub fn is_propositional(&self) -> bool {
        match self {
            True | False | Atom(_) => true,
            Not(a) => a.is_propositional(),
            And(a, b) | Or(a, b) | Implies(a, b) => a.is_propositional() && b.is_propositional(),
            Next(_) | Until(..) | Release(..) | Globally(_) | Eventually(_) => false,
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            True | False | Atom(_) => true,
            Not(a) => matches!(**a, Atom(_)),
            Implies(..) => false,
            Next(a) | Globally(a) | Eventually(a) => a.is_nnf(),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }
}

/// Negation normal form of `f`: negations only on atoms, `->` eliminated.
pub fn nnf(f: &Ltl) -> Ltl {
    push(f, false)
}

/// `¬body` in negation normal form.
pub fn negate_to_nnf(body: &Ltl) -> Ltl {
    push(body, true)
}

fn push(f: &Ltl, neg: bool) -> Ltl {
    match (f, neg) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(a), false) => Atom(a.clone()),
        (Atom(a), true) => Ltl::not(Atom(a.clone())),
        (Not(a), n) => push(a, !n),
        (And(a, b), false) => Ltl::and(push(a, false), push(b, false)),
        (And(a, b), true) => Ltl::or(push(a, true), push(b, true)),
        (Or(a, b), false) => Ltl::or(push(a, false), push(b, false)),
        (Or(a, b), true) => Ltl::and(push(a, true), push(b, true)),
        (Implies(a, b), false) => Ltl::or(push(a, true), push(b, false)),
        (Implies(a, b), true) => Ltl::and(push(a, false), push(b, true)),
        (Next(a), n) => Ltl::next(push(a, n)),
        (Until(a, b), false) => Ltl::until(push(a, false), push(b, false)),
        (Until(a, b), true) => Ltl::release(push(a, true), push(b, true)),
        (Release(a, b), false) => Ltl::release(push(a, false), push(b, false)),
        (Release(a, b), true) => Ltl::until(push(a, true), push(b, true)),
        (Globally(a), false) => Ltl::globally(push(a, false)),
        (Globally(a), true) => Ltl::eventually(push(a, true)),
        (Eventually(a), false) => Ltl::eventually(push(a, false)),
        (Eventually(a), true) => Ltl::globally(push(a, true)),
    }
}

/// Rewrites an NNF formula into the `{X, U, R, ∧, ∨, ¬atom}` basis.
pub fn to_basis(f: &Ltl) -> Ltl {
    let f = if f.is_nnf() { f.clone() } else { nnf(f) };
    basis(&f)
}

fn basis(f: &Ltl) -> Ltl {
    match f {
        True | False | Atom(_) | Not(_) => f.clone(),
        And(a, b) => Ltl::and(basis(a), basis(b)),
        Or(a, b) => Ltl::or(basis(a), basis(b)),
        Implies(a, b) => Ltl::or(nnf(&Ltl::not((**a).clone())), basis(b)),
        Next(a) => Ltl::next(basis(a)),
        Until(a, b) => Ltl::until(basis(a), basis(b)),
        Release(a, b) => Ltl::release(basis(a), basis(b)),
        Globally(a) => Ltl::release(False, basis(a)),
        Eventually(a) => Ltl::until(True, basis(a)),
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(a) => write!(f, "{a}"),
            Not(a) => write!(f, "!{a}"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            Next(a) => write!(f, "X {a}"),
            Until(a, b) => write!(f, "({a} U {b})"),
            Release(a, b) => write!(f, "({a} R {b})"),
            Globally(a) => write!(f, "G {a}"),
            Eventually(a) => write!(f, "F {a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperLtlFormula {
    pub prefix: Vec<(Quantifier, String)>,
    pub body: Ltl,
}

impl HyperLtlFormula {
    pub fn quantifiers(&self) -> Vec<Quantifier> {
        self.prefix.iter().map(|(q, _)| *q).collect()
    }

    /// 1-based copy index of a trace variable.
    pub fn trace_index(&self, var: &str) -> Option<usize> {
        self.prefix
            .iter()
            .position(|(_, v)| v == var)
            .map(|i| i + 1)
    }

    pub fn classify(&self) -> FragmentClass {
        classify(&self.quantifiers())
    }
}

impl fmt::Display for HyperLtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            let kw = match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            write!(f, "{kw} {v}. ")?;
        }
        write!(f, "{}", self.body)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FragmentClass {
    AllUniversal,
    AllExistential,
    ForallStarExistsStar { l: usize },
    General { alternations: usize },
}

impl FragmentClass {
    /// Number of leading universal quantifiers when the prefix is `∀^l ∃^(p-l)`.
    pub fn forall_exists_split(&self, p: usize) -> Option<usize> {
        match *self {
            FragmentClass::AllUniversal => Some(p),
            FragmentClass::AllExistential => Some(0),
            FragmentClass::ForallStarExistsStar { l } => Some(l),
            FragmentClass::General { .. } => None,
        }
    }
}

pub fn classify(prefix: &[Quantifier]) -> FragmentClass {
    if prefix.iter().all(|q| *q == Quantifier::Forall) {
        return FragmentClass::AllUniversal;
    }
    if prefix.iter().all(|q| *q == Quantifier::Exists) {
        return FragmentClass::AllExistential;
    }
    let alternations = prefix.windows(2).filter(|w| w[0] != w[1]).count();
    let l = prefix
        .iter()
        .take_while(|q| **q == Quantifier::Forall)
        .count();
    if prefix[l..].iter().all(|q| *q == Quantifier::Exists) {
        FragmentClass::ForallStarExistsStar { l }
    } else {
        FragmentClass::General { alternations }
    }
}
