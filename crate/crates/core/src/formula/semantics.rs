//! Exact LTL satisfaction on ultimately periodic words.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FormulaError, IndexedAtom, Ltl};

/// Set of indexed atoms true at one position.
pub type Letter = BTreeSet<IndexedAtom>;

/// The word `stem · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoWord {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

/// A single trace `stem · cycle^ω` whose letters are sets of atom names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub stem: Vec<BTreeSet<String>>,
    pub cycle: Vec<BTreeSet<String>>,
}

impl Trace {
    fn at(&self, k: usize) -> &BTreeSet<String> {
        if k < self.stem.len() {
            &self.stem[k]
        } else {
            &self.cycle[(k - self.stem.len()) % self.cycle.len()]
        }
    }
}

impl LassoWord {
    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn letter(&self, i: usize) -> &Letter {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[i - self.stem.len()]
        }
    }

    /// Successor position in the finite presentation.
    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.stem.len()
        }
    }
}

/// Satisfaction of `body` at position 0 of `word`.
pub fn eval_on_word(body: &Ltl, word: &LassoWord) -> Result<bool, FormulaError> {
    if word.cycle.is_empty() {
        return Err(FormulaError::Alphabet(
            "lasso word needs a nonempty cycle".into(),
        ));
    }
    Ok(truth(body, word)[0])
}

fn truth(f: &Ltl, w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(a) => (0..n).map(|i| w.letter(i).contains(a)).collect(),
        Ltl::Not(a) => truth(a, w).into_iter().map(|b| !b).collect(),
        Ltl::And(a, b) => zip(truth(a, w), truth(b, w), |x, y| x && y),
        Ltl::Or(a, b) => zip(truth(a, w), truth(b, w), |x, y| x || y),
        Ltl::Implies(a, b) => zip(truth(a, w), truth(b, w), |x, y| !x || y),
        Ltl::Next(a) => {
            let t = truth(a, w);
            (0..n).map(|i| t[w.succ(i)]).collect()
        }
        Ltl::Until(a, b) => least_fixpoint(&truth(a, w), &truth(b, w), w),
        Ltl::Eventually(b) => least_fixpoint(&vec![true; n], &truth(b, w), w),
        Ltl::Release(a, b) => greatest_fixpoint(&truth(a, w), &truth(b, w), w),
        Ltl::Globally(b) => greatest_fixpoint(&vec![false; n], &truth(b, w), w),
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// `u = b ∨ (a ∧ X u)`, iterated from false.
fn least_fixpoint(a: &[bool], b: &[bool], w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    let mut u = vec![false; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let v = b[i] || (a[i] && u[w.succ(i)]);
            if v != u[i] {
                u[i] = v;
                changed = true;
            }
        }
        if !changed {
            return u;
        }
    }
}

/// `r = b ∧ (a ∨ X r)`, iterated from true.
fn greatest_fixpoint(a: &[bool], b: &[bool], w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    let mut r = vec![true; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let v = b[i] && (a[i] || r[w.succ(i)]);
            if v != r[i] {
                r[i] = v;
                changed = true;
            }
        }
        if !changed {
            return r;
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Evaluates `body` on the zip of named single-trace words.
///
/// Only single-trace atoms are meaningful here; joint atoms are rejected.
pub fn eval_on_lasso_traces(body: &Ltl, traces: &[(String, Trace)]) -> Result<bool, FormulaError> {
    if traces.is_empty() {
        return Err(FormulaError::Alphabet("no traces given".into()));
    }
    if let Some((v, _)) = traces.iter().find(|(_, t)| t.cycle.is_empty()) {
        return Err(FormulaError::Alphabet(format!(
            "trace '{v}' has an empty cycle"
        )));
    }
    for a in body.atoms() {
        if a.traces.len() != 1 {
            return Err(FormulaError::Alphabet(format!(
                "joint atom {a} has no per-trace meaning"
            )));
        }
        if !traces.iter().any(|(v, _)| *v == a.traces[0]) {
            return Err(FormulaError::Alphabet(format!(
                "no trace for variable in {a}"
            )));
        }
    }
    let stem_len = traces.iter().map(|(_, t)| t.stem.len()).max().unwrap_or(0);
    let period = traces.iter().fold(1, |acc, (_, t)| {
        acc / gcd(acc, t.cycle.len()) * t.cycle.len()
    });
    let letter = |k: usize| -> Letter {
        traces
            .iter()
            .flat_map(|(v, t)| {
                t.at(k).iter().map(move |name| IndexedAtom {
                    name: name.clone(),
                    traces: vec![v.clone()],
                })
            })
            .collect()
    };
    let word = LassoWord {
        stem: (0..stem_len).map(letter).collect(),
        cycle: (stem_len..stem_len + period).map(letter).collect(),
    };
    eval_on_word(body, &word)
}
