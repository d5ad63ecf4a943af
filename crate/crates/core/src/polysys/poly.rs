use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PolyError;

/// Exponent vector aligned with the owning polynomial's variable list.
///
/// Ordered graded-lexicographically: total degree first, then the first
/// differing exponent decides.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over named variables with `f64` coefficients.
///
/// `vars` holds exactly the variables that occur in some term, sorted, so two
/// equal polynomials are structurally equal and serialize identically.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Polynomial::zero();
        if c != 0.0 {
            p.terms.insert(Monomial(Vec::new()), c);
        }
        p
    }

    pub fn var(name: &str) -> Self {
        Polynomial {
            vars: vec![name.to_string()],
            terms: BTreeMap::from([(Monomial(vec![1]), 1.0)]),
        }
    }

    /// Builds a polynomial from `(variable powers, coefficient)` pairs.
    /// Repeated monomials are summed.
    pub fn from_terms<'a, I, M>(terms: I) -> Self
    where
        I: IntoIterator<Item = (M, f64)>,
        M: IntoIterator<Item = (&'a str, u32)>,
    {
        let mut acc: BTreeMap<BTreeMap<String, u32>, f64> = BTreeMap::new();
        for (mono, c) in terms {
            let mut key = BTreeMap::new();
            for (v, e) in mono {
                if e > 0 {
                    *key.entry(v.to_string()).or_insert(0) += e;
                }
            }
            *acc.entry(key).or_insert(0.0) += c;
        }
        Self::from_sparse(acc)
    }

    fn from_sparse(acc: BTreeMap<BTreeMap<String, u32>, f64>) -> Self {
        let vars: BTreeSet<String> = acc
            .iter()
            .filter(|(_, c)| **c != 0.0)
            .flat_map(|(k, _)| k.keys().cloned())
            .collect();
        let vars: Vec<String> = vars.into_iter().collect();
        let mut terms = BTreeMap::new();
        for (key, c) in acc {
            if c == 0.0 {
                continue;
            }
            let exps = vars
                .iter()
                .map(|v| key.get(v).copied().unwrap_or(0))
                .collect();
            terms.insert(Monomial(exps), c);
        }
        Polynomial { vars, terms }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().rev().map(|(m, c)| (m, *c))
    }

    /// Terms as `(var -> exponent, coefficient)` in descending order.
    pub fn named_terms(&self) -> Vec<(BTreeMap<String, u32>, f64)> {
        self.terms()
            .map(|(m, c)| {
                let key = self
                    .vars
                    .iter()
                    .zip(m.exponents())
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| (v.clone(), e))
                    .collect();
                (key, c)
            })
            .collect()
    }

    /// Coefficient of the monomial given as `(var, exponent)` pairs.
    pub fn coefficient(&self, mono: &[(&str, u32)]) -> f64 {
        let mut exps = vec![0u32; self.vars.len()];
        for (v, e) in mono {
            if *e == 0 {
                continue;
            }
            match self.vars.binary_search_by(|x| x.as_str().cmp(v)) {
                Ok(i) => exps[i] += e,
                Err(_) => return 0.0,
            }
        }
        self.terms.get(&Monomial(exps)).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&[])
    }

    fn to_sparse(&self) -> BTreeMap<BTreeMap<String, u32>, f64> {
        self.named_terms().into_iter().collect()
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        if k == 0.0 {
            return Polynomial::zero();
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out.prune_vars();
        out
    }

    fn prune_vars(&mut self) {
        let used: Vec<bool> = (0..self.vars.len())
            .map(|i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect();
        if used.iter().all(|&u| u) {
            return;
        }
        self.vars = self
            .vars
            .iter()
            .zip(&used)
            .filter(|(_, &u)| u)
            .map(|(v, _)| v.clone())
            .collect();
        self.terms = std::mem::take(&mut self.terms)
            .into_iter()
            .map(|(m, c)| {
                let exps =
                    m.0.iter()
                        .zip(&used)
                        .filter(|(_, &u)| u)
                        .map(|(e, _)| *e)
                        .collect();
                (Monomial(exps), c)
            })
            .collect();
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::constant(1.0);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Evaluates by summing monomials in canonical order.
    pub fn eval(&self, point: &BTreeMap<String, f64>) -> Result<f64, PolyError> {
        self.eval_with(|name| point.get(name).copied())
    }

    pub fn eval_with<F>(&self, lookup: F) -> Result<f64, PolyError>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let values = self
            .vars
            .iter()
            .map(|v| lookup(v).ok_or_else(|| PolyError::MissingVariable(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .terms()
            .map(|(m, c)| {
                m.0.iter().zip(&values).fold(
                    c,
                    |acc, (&e, &x)| if e == 0 { acc } else { acc * x.powi(e as i32) },
                )
            })
            .sum())
    }

    /// Composition: every variable in `sub` is replaced by its polynomial.
    pub fn substitute(&self, sub: &BTreeMap<String, Polynomial>) -> Polynomial {
        let mut out: BTreeMap<BTreeMap<String, u32>, f64> = BTreeMap::new();
        let mut cache: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
        for (m, c) in self.terms() {
            let mut prod = Polynomial::constant(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let factor = cache
                    .entry((i, e))
                    .or_insert_with(|| match sub.get(&self.vars[i]) {
                        Some(q) => q.pow(e),
                        None => Polynomial::var(&self.vars[i]).pow(e),
                    })
                    .clone();
                prod = &prod * &factor;
            }
            for (k, v) in prod.to_sparse() {
                *out.entry(k).or_insert(0.0) += v;
            }
        }
        Polynomial::from_sparse(out)
    }

    /// Renames variables; names that collide are merged.
    pub fn rename<F>(&self, f: F) -> Polynomial
    where
        F: Fn(&str) -> String,
    {
        let mut out: BTreeMap<BTreeMap<String, u32>, f64> = BTreeMap::new();
        for (key, c) in self.named_terms() {
            let mut renamed = BTreeMap::new();
            for (v, e) in key {
                *renamed.entry(f(&v)).or_insert(0) += e;
            }
            *out.entry(renamed).or_insert(0.0) += c;
        }
        Polynomial::from_sparse(out)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Compiles against a fixed variable order for fast repeated evaluation.
    pub fn compile(&self, order: &[String]) -> Result<CompiledPoly, PolyError> {
        let idx = self
            .vars
            .iter()
            .map(|v| {
                order
                    .iter()
                    .position(|o| o == v)
                    .ok_or_else(|| PolyError::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let terms = self
            .terms()
            .map(|(m, c)| {
                let factors =
                    m.0.iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (idx[i], e as i32))
                        .collect();
                (factors, c)
            })
            .collect();
        Ok(CompiledPoly { terms })
    }
}

#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(Vec<(usize, i32)>, f64)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(fs, c)| fs.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e)))
            .sum()
    }
}

fn combine(a: &Polynomial, b: &Polynomial, sign: f64) -> Polynomial {
    let mut acc = a.to_sparse();
    for (k, v) in b.named_terms() {
        *acc.entry(k).or_insert(0.0) += sign * v;
    }
    Polynomial::from_sparse(acc)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        combine(self, rhs, -1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let lhs = self.named_terms();
        let rhs = rhs.named_terms();
        let mut acc: BTreeMap<BTreeMap<String, u32>, f64> = BTreeMap::new();
        for (ka, ca) in &lhs {
            for (kb, cb) in &rhs {
                let mut k = ka.clone();
                for (v, e) in kb {
                    *k.entry(v.clone()).or_insert(0) += e;
                }
                *acc.entry(k).or_insert(0.0) += ca * cb;
            }
        }
        Polynomial::from_sparse(acc)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { (&self).$m(&rhs) }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms().enumerate() {
            let mag = if n == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                c.abs()
            } else {
                write!(f, "{}", if c < 0.0 { " - " } else { " + " })?;
                c.abs()
            };
            let factors: Vec<String> = self
                .vars
                .iter()
                .zip(m.exponents())
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        v.clone()
                    } else {
                        format!("{v}^{e}")
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Polynomial {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse::parse_unchecked(s)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
