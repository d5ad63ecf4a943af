//! Polynomials whose coefficients are affine in the decision variables.

use std::collections::BTreeMap;

use super::SosError;
use crate::polysys::Polynomial;

/// Exponent vector over the program's variable order.
pub type Exps = Vec<u32>;

/// Constant polynomial keyed by exponent vectors.
pub type ConstPoly = BTreeMap<Exps, f64>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: BTreeMap<usize, f64>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        AffineExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(k: usize, coef: f64) -> Self {
        AffineExpr {
            terms: BTreeMap::from([(k, coef)]),
            constant: 0.0,
        }
    }

    pub fn add_scaled(&mut self, other: &AffineExpr, k: f64) {
        self.constant += k * other.constant;
        for (&v, &c) in &other.terms {
            *self.terms.entry(v).or_insert(0.0) += k * c;
        }
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&k, &c)| c * values[k]).sum::<f64>()
    }
}

pub fn exps_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

fn add_exps(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Converts `p` to exponent vectors over `order`.
pub fn const_poly(p: &Polynomial, order: &[String]) -> Result<ConstPoly, SosError> {
    let mut out = ConstPoly::new();
    for (named, c) in p.named_terms() {
        let mut e = vec![0; order.len()];
        for (v, k) in named {
            let i = order
                .iter()
                .position(|o| *o == v)
                .ok_or(SosError::UnknownVariable(v))?;
            e[i] = k;
        }
        out.insert(e, c);
    }
    Ok(out)
}

pub fn const_mul(a: &ConstPoly, b: &ConstPoly) -> ConstPoly {
    let mut out = ConstPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            *out.entry(add_exps(ea, eb)).or_insert(0.0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0.0);
    out
}

/// Converts back to a named polynomial.
pub fn to_polynomial(p: &ConstPoly, order: &[String]) -> Polynomial {
    let mut out = Polynomial::zero();
    for (e, &c) in p {
        let mut term = Polynomial::constant(c);
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                term = &term * &Polynomial::var(&order[i]).pow(k);
            }
        }
        out = &out + &term;
    }
    out
}

/// All exponent vectors supported on `vars` with total degree at most
/// `max_deg` and per-variable degree at most `caps[i]`, graded by degree.
pub fn monomials(nvars: usize, vars: &[usize], max_deg: u32, caps: Option<&[u32]>) -> Vec<Exps> {
    let mut out = vec![vec![0; nvars]];
    for &v in vars {
        let cap = caps.map_or(max_deg, |c| c[v].min(max_deg));
        let mut next = Vec::new();
        for e in &out {
            let used = exps_degree(e);
            for k in 0..=cap {
                if used + k > max_deg {
                    break;
                }
                let mut e2 = e.clone();
                e2[v] = k;
                next.push(e2);
            }
        }
        out = next;
    }
    out.sort_by(|a, b| exps_degree(a).cmp(&exps_degree(b)).then_with(|| b.cmp(a)));
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymPoly {
    pub terms: BTreeMap<Exps, AffineExpr>,
}

impl SymPoly {
    pub fn from_const(p: &ConstPoly) -> Self {
        SymPoly {
            terms: p
                .iter()
                .map(|(e, &c)| (e.clone(), AffineExpr::constant(c)))
                .collect(),
        }
    }

    /// `x_k · p` for decision variable `k`.
    pub fn var_times(k: usize, p: &ConstPoly) -> Self {
        SymPoly {
            terms: p
                .iter()
                .map(|(e, &c)| (e.clone(), AffineExpr::var(k, c)))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &SymPoly, k: f64) {
        for (e, a) in &other.terms {
            self.terms.entry(e.clone()).or_default().add_scaled(a, k);
        }
        self.terms.retain(|_, a| !a.is_zero());
    }

    pub fn mul_const(&self, p: &ConstPoly) -> SymPoly {
        let mut out = SymPoly::default();
        for (e, a) in &self.terms {
            for (ep, &c) in p {
                out.terms
                    .entry(add_exps(e, ep))
                    .or_default()
                    .add_scaled(a, c);
            }
        }
        out.terms.retain(|_, a| !a.is_zero());
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| exps_degree(e)).max().unwrap_or(0)
    }

    /// Per-variable maximum exponent.
    pub fn var_degrees(&self, nvars: usize) -> Vec<u32> {
        let mut out = vec![0; nvars];
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                out[i] = out[i].max(k);
            }
        }
        out
    }

    /// Substitutes decision values.
    pub fn evaluate(&self, values: &[f64]) -> ConstPoly {
        let mut out: ConstPoly = self
            .terms
            .iter()
            .map(|(e, a)| (e.clone(), a.eval(values)))
            .collect();
        out.retain(|_, c| *c != 0.0);
        out
    }
}
