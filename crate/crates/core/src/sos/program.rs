//! Compilation of certificate existence into sum-of-squares constraints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::symbolic::{
    const_mul, const_poly, exps_degree, monomials, to_polynomial, AffineExpr, ConstPoly, Exps,
    SymPoly,
};
use super::SosError;
use crate::abc::ConditionalInvariance;
use crate::formula::Quantifier;
use crate::polysys::{
    copy_var, split_copy_var, AugmentedSystem, BasicSet, IntervalBox, Polynomial,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Degrees {
    pub barrier: u32,
    pub multiplier: u32,
    pub strategy: u32,
}

impl Default for Degrees {
    fn default() -> Self {
        Degrees {
            barrier: 2,
            multiplier: 2,
            strategy: 2,
        }
    }
}

/// How an existential input enters the decrease expression.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    /// A given strategy `h`; the term is `μ·(w − h)` with a free polynomial `μ`.
    Fixed(Polynomial),
    /// Unknown strategy coefficients; the term is `(w − h)` with multiplier one.
    Free { degree: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecisionVar {
    Free {
        label: String,
    },
    /// Entry `(i, j)`, `i ≤ j`, of Gram block `block`.
    Gram {
        block: usize,
        i: usize,
        j: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramBlock {
    pub label: String,
    pub basis: Vec<Exps>,
    /// Decision index of each upper-triangular entry.
    pub entries: BTreeMap<(usize, usize), usize>,
}

/// `expr = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub label: String,
    pub expr: AffineExpr,
}

/// An expression required to be SOS and the Gram block representing it.
#[derive(Clone, Debug, PartialEq)]
pub struct MasterExpr {
    pub label: String,
    pub block: usize,
    pub poly: SymPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyUnknown {
    /// Normalized coordinates.
    Fixed(Polynomial),
    Free(Vec<(Exps, usize)>),
}

/// Affine change of coordinates `x = center + radius·y` per variable.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Scaling {
    pub center: BTreeMap<String, f64>,
    pub radius: BTreeMap<String, f64>,
}

impl Scaling {
    /// Maps every bounded, non-degenerate variable of `vars` to `[-1, 1]`.
    pub fn from_box(vars: &[String], bx: &IntervalBox) -> Self {
        let mut s = Scaling::default();
        for v in vars {
            if let Some((lo, hi)) = bx.get(v) {
                if hi > lo {
                    s.center.insert(v.clone(), 0.5 * (lo + hi));
                    s.radius.insert(v.clone(), 0.5 * (hi - lo));
                }
            }
        }
        s
    }

    fn cr(&self, v: &str) -> (f64, f64) {
        (
            self.center.get(v).copied().unwrap_or(0.0),
            self.radius.get(v).copied().unwrap_or(1.0),
        )
    }

    /// Rewrites an original-coordinate polynomial in normalized coordinates.
    pub fn to_normalized(&self, p: &Polynomial) -> Polynomial {
        let sub = p
            .vars()
            .iter()
            .map(|v| {
                let (c, r) = self.cr(v);
                (
                    v.clone(),
                    &Polynomial::constant(c) + &Polynomial::var(v).scale(r),
                )
            })
            .collect();
        p.substitute(&sub)
    }

    /// Rewrites a normalized-coordinate polynomial in original coordinates.
    pub fn to_original(&self, p: &Polynomial) -> Polynomial {
        let sub = p
            .vars()
            .iter()
            .map(|v| {
                let (c, r) = self.cr(v);
                (
                    v.clone(),
                    (&Polynomial::var(v) - &Polynomial::constant(c)).scale(1.0 / r),
                )
            })
            .collect();
        p.substitute(&sub)
    }

    /// Normalized form of a map producing variable `target`: `(p(x) − c) / r`.
    pub fn map_to_normalized(&self, target: &str, p: &Polynomial) -> Polynomial {
        let (c, r) = self.cr(target);
        (&self.to_normalized(p) - &Polynomial::constant(c)).scale(1.0 / r)
    }

    /// Inverse of [`Scaling::map_to_normalized`].
    pub fn map_to_original(&self, target: &str, p: &Polynomial) -> Polynomial {
        let (c, r) = self.cr(target);
        &Polynomial::constant(c) + &self.to_original(p).scale(r)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SosProgram {
    /// Polynomial variables: augmented state followed by inputs.
    pub vars: Vec<String>,
    pub n_state: usize,
    pub decision: Vec<DecisionVar>,
    pub blocks: Vec<GramBlock>,
    pub equalities: Vec<Equality>,
    pub masters: Vec<MasterExpr>,
    /// Certificate coefficients in normalized coordinates.
    pub barrier: Vec<(Exps, usize)>,
    pub strategies: BTreeMap<String, StrategyUnknown>,
    pub epsilon: f64,
    pub scaling: Scaling,
}

impl SosProgram {
    pub fn num_free(&self) -> usize {
        self.decision
            .iter()
            .filter(|d| matches!(d, DecisionVar::Free { .. }))
            .count()
    }

    /// Index among free variables for every free decision variable.
    pub fn free_ordinals(&self) -> BTreeMap<usize, usize> {
        self.decision
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, DecisionVar::Free { .. }))
            .enumerate()
            .map(|(ord, (k, _))| (k, ord))
            .collect()
    }

    /// The master expression labelled `label`.
    pub fn master(&self, label: &str) -> Option<&MasterExpr> {
        self.masters.iter().find(|m| m.label == label)
    }

    /// Barrier in normalized coordinates for given decision values.
    pub fn barrier_normalized(&self, values: &[f64]) -> Polynomial {
        let p: ConstPoly = self
            .barrier
            .iter()
            .map(|(e, k)| (e.clone(), values[*k]))
            .collect();
        to_polynomial(&p, &self.vars)
    }
}

struct Builder {
    nv: usize,
    decision: Vec<DecisionVar>,
    blocks: Vec<GramBlock>,
    equalities: Vec<Equality>,
    masters: Vec<MasterExpr>,
}

impl Builder {
    fn new(nv: usize) -> Self {
        Builder {
            nv,
            decision: Vec::new(),
            blocks: Vec::new(),
            equalities: Vec::new(),
            masters: Vec::new(),
        }
    }

    fn free_poly(
        &mut self,
        label: &str,
        vars: &[usize],
        deg: u32,
    ) -> (SymPoly, Vec<(Exps, usize)>) {
        let mut poly = SymPoly::default();
        let mut coeffs = Vec::new();
        for e in monomials(self.nv, vars, deg, None) {
            let k = self.decision.len();
            self.decision.push(DecisionVar::Free {
                label: format!("{label}{e:?}"),
            });
            poly.terms.insert(e.clone(), AffineExpr::var(k, 1.0));
            coeffs.push((e, k));
        }
        (poly, coeffs)
    }

    /// New Gram block over `basis`; returns its index and `m(x)ᵀ Q m(x)`.
    fn gram(&mut self, label: &str, basis: Vec<Exps>) -> (usize, SymPoly) {
        let b = self.blocks.len();
        let mut entries = BTreeMap::new();
        let mut poly = SymPoly::default();
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let k = self.decision.len();
                self.decision.push(DecisionVar::Gram { block: b, i, j });
                entries.insert((i, j), k);
                let e: Exps = basis[i].iter().zip(&basis[j]).map(|(x, y)| x + y).collect();
                let coef = if i == j { 1.0 } else { 2.0 };
                poly.terms
                    .entry(e)
                    .or_default()
                    .add_scaled(&AffineExpr::var(k, coef), 1.0);
            }
        }
        self.blocks.push(GramBlock {
            label: label.to_string(),
            basis,
            entries,
        });
        (b, poly)
    }

    fn sos_poly(&mut self, label: &str, vars: &[usize], deg: u32) -> SymPoly {
        let basis = monomials(self.nv, vars, deg / 2, None);
        self.gram(label, basis).1
    }

    fn require_sos_with(&mut self, label: &str, expr: SymPoly, basis: Vec<Exps>) {
        let (b, gram) = self.gram(label, basis);
        let mut diff = expr.clone();
        diff.add_scaled(&gram, -1.0);
        for a in diff.terms.into_values() {
            self.equalities.push(Equality {
                label: label.to_string(),
                expr: a,
            });
        }
        self.masters.push(MasterExpr {
            label: label.to_string(),
            block: b,
            poly: expr,
        });
    }

    fn require_sos(&mut self, label: &str, expr: SymPoly, vars: &[usize]) {
        let caps: Vec<u32> = expr.var_degrees(self.nv).iter().map(|k| k / 2).collect();
        let basis = monomials(self.nv, vars, expr.degree() / 2, Some(&caps));
        self.require_sos_with(label, expr, basis);
    }

    fn finish(
        self,
        vars: Vec<String>,
        n_state: usize,
        epsilon: f64,
        scaling: Scaling,
    ) -> SosProgram {
        SosProgram {
            vars,
            n_state,
            decision: self.decision,
            blocks: self.blocks,
            equalities: self.equalities,
            masters: self.masters,
            barrier: Vec::new(),
            strategies: BTreeMap::new(),
            epsilon,
            scaling,
        }
    }
}

/// SOS membership program for a constant polynomial. With an explicit
/// basis, a monomial of `p` that no basis product can produce is an error.
pub fn coefficient_match(p: &Polynomial, basis: Option<&[Exps]>) -> Result<SosProgram, SosError> {
    let vars = p.vars().to_vec();
    let nv = vars.len();
    let expr = SymPoly::from_const(&const_poly(p, &vars)?);
    let mut b = Builder::new(nv);
    let all: Vec<usize> = (0..nv).collect();
    match basis {
        Some(basis) => {
            if let Some(e) = basis.iter().find(|e| e.len() != nv) {
                return Err(SosError::Dimension {
                    expected: nv,
                    found: e.len(),
                });
            }
            for e in expr.terms.keys() {
                let reachable = basis.iter().any(|x| {
                    basis
                        .iter()
                        .any(|y| x.iter().zip(y).zip(e).all(|((a, b), c)| a + b == *c))
                });
                if !reachable {
                    return Err(SosError::BasisExtension(
                        to_polynomial(&ConstPoly::from([(e.clone(), 1.0)]), &vars).to_string(),
                    ));
                }
            }
            b.require_sos_with("sos", expr, basis.to_vec());
        }
        None => b.require_sos("sos", expr, &all),
    }
    Ok(b.finish(vars, nv, 0.0, Scaling::default()))
}

fn normalized_gs(
    set: &BasicSet,
    scaling: &Scaling,
    order: &[String],
) -> Result<Vec<ConstPoly>, SosError> {
    let mut out: Vec<ConstPoly> = Vec::new();
    for g in set.gs() {
        let mut gn = scaling.to_normalized(g);
        let m = gn.max_abs_coefficient();
        if m > 0.0 {
            gn = gn.scale(1.0 / m);
        }
        if gn.vars().is_empty() && gn.constant_term() >= 0.0 {
            continue;
        }
        let c = const_poly(&gn, order)?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn max_degree(gs: &[ConstPoly]) -> u32 {
    gs.iter()
        .flat_map(|g| g.keys().map(|e| exps_degree(e)))
        .max()
        .unwrap_or(0)
}

/// Builds one program whose feasibility yields a common certificate for
/// every conditional invariance in `cis`.
///
/// Initial and unsafe conditions are instantiated per region clause; the
/// decrease condition once. `strategies` gives the encoding per existential
/// input coordinate (copy name, e.g. `w__2`).
#[allow(clippy::too_many_arguments)]
pub fn build_sos_program(
    cis: &[ConditionalInvariance],
    aug: &AugmentedSystem,
    prefix: &[Quantifier],
    degrees: &Degrees,
    epsilon: f64,
    strategies: &BTreeMap<String, StrategySpec>,
    normalize: bool,
) -> Result<SosProgram, SosError> {
    if prefix.len() != aug.p {
        return Err(SosError::PrefixMismatch {
            expected: aug.p,
            found: prefix.len(),
        });
    }
    if degrees.multiplier % 2 == 1 {
        return Err(SosError::DegreeDeficit(format!(
            "multiplier degree {} must be even",
            degrees.multiplier
        )));
    }
    let order: Vec<String> = aug
        .state_vars
        .iter()
        .chain(&aug.input_vars)
        .cloned()
        .collect();
    let n = aug.state_vars.len();
    let nv = order.len();
    let state_idx: Vec<usize> = (0..n).collect();
    let all_idx: Vec<usize> = (0..nv).collect();
    let bx = aug.sampling_box();
    let scaling = if normalize {
        Scaling::from_box(&order, &bx)
    } else {
        Scaling::default()
    };

    let f: Vec<ConstPoly> = aug
        .state_vars
        .iter()
        .zip(&aug.f)
        .map(|(v, fi)| const_poly(&scaling.map_to_normalized(v, fi), &order))
        .collect::<Result<_, _>>()?;
    let f_deg = f
        .iter()
        .map(|p| p.keys().map(|e| exps_degree(e)).max().unwrap_or(0))
        .max()
        .unwrap_or(1)
        .max(1);
    let gx = normalized_gs(&aug.state_set, &scaling, &order)?;
    let gw = normalized_gs(&aug.input_set, &scaling, &order)?;
    let composed = degrees.barrier * f_deg;
    let g_deg = max_degree(&gx).max(max_degree(&gw));
    if !gx.is_empty() && composed > degrees.multiplier + max_degree(&gx) {
        return Err(SosError::DegreeDeficit(format!(
            "certificate composed with the dynamics has degree {composed}, above multiplier degree {} plus constraint degree {}",
            degrees.multiplier,
            max_degree(&gx)
        )));
    }

    let mut b = Builder::new(nv);
    let (barrier, barrier_coeffs) = b.free_poly("B", &state_idx, degrees.barrier);

    for (ci_id, ci) in cis.iter().enumerate() {
        for (kind, region) in [("initial", &ci.set_a), ("unsafe", &ci.set_b)] {
            for (cl_id, clause) in region.clauses().iter().enumerate() {
                if clause.intersect(&aug.state_set).box_within(&bx).is_empty() {
                    continue;
                }
                let gs = normalized_gs(clause, &scaling, &order)?;
                let label = format!("{kind}[{ci_id}.{cl_id}]");
                let mut expr = SymPoly::default();
                if kind == "initial" {
                    expr.add_scaled(&barrier, -1.0);
                } else {
                    expr.add_scaled(&barrier, 1.0);
                    expr.add_scaled(
                        &SymPoly::from_const(&ConstPoly::from([(vec![0; nv], epsilon)])),
                        -1.0,
                    );
                }
                for (k, g) in gs.iter().enumerate() {
                    let lam = b.sos_poly(
                        &format!("{label}.lambda{k}"),
                        &state_idx,
                        degrees.multiplier,
                    );
                    expr.add_scaled(&lam.mul_const(g), -1.0);
                }
                b.require_sos(&label, expr, &state_idx);
            }
        }
    }

    // decrease: B(x) − B(f(x, w)) − λ·g(x) − λin·gin(w) − strategy terms
    let mut expr = barrier.clone();
    for (e, k) in &barrier_coeffs {
        let mut m: ConstPoly = ConstPoly::from([(vec![0; nv], 1.0)]);
        for (i, &p) in e.iter().enumerate() {
            for _ in 0..p {
                m = const_mul(&m, &f[i]);
            }
        }
        expr.add_scaled(&SymPoly::var_times(*k, &m), -1.0);
    }
    for (k, g) in gx.iter().chain(&gw).enumerate() {
        let lam = b.sos_poly(&format!("decrease.lambda{k}"), &all_idx, degrees.multiplier);
        expr.add_scaled(&lam.mul_const(g), -1.0);
    }
    let top = composed.max(degrees.multiplier + g_deg);
    let mut unknowns = BTreeMap::new();
    for (i, q) in prefix.iter().enumerate() {
        if *q == Quantifier::Forall {
            continue;
        }
        let copy = i + 1;
        let allowed: Vec<usize> = (0..nv)
            .filter(|&j| j < n || split_copy_var(&order[j]).is_some_and(|(_, c)| c < copy))
            .collect();
        for w in aug.copy_input_vars(copy) {
            let wi = order.iter().position(|v| *v == w).expect("input in order");
            let mut w_poly = ConstPoly::new();
            let mut e = vec![0; nv];
            e[wi] = 1;
            w_poly.insert(e, 1.0);
            match strategies
                .get(&w)
                .ok_or_else(|| SosError::MissingStrategy(w.clone()))?
            {
                StrategySpec::Fixed(h) => {
                    let allowed_names: Vec<&String> = allowed.iter().map(|&j| &order[j]).collect();
                    if let Some(v) = h.vars().iter().find(|v| !allowed_names.contains(v)) {
                        return Err(SosError::StrategyScope {
                            input: w.clone(),
                            var: v.clone(),
                        });
                    }
                    let hn = scaling.map_to_normalized(&w, h);
                    let mut diff = w_poly.clone();
                    for (e, c) in const_poly(&hn, &order)? {
                        *diff.entry(e).or_insert(0.0) -= c;
                    }
                    diff.retain(|_, c| *c != 0.0);
                    let d_mu = top.saturating_sub(hn.degree().max(1));
                    let (mu, _) = b.free_poly(&format!("mu[{w}]"), &all_idx, d_mu);
                    expr.add_scaled(&mu.mul_const(&diff), -1.0);
                    unknowns.insert(w.clone(), StrategyUnknown::Fixed(hn));
                }
                StrategySpec::Free { degree } => {
                    let (h, coeffs) = b.free_poly(&format!("h[{w}]"), &allowed, *degree);
                    expr.add_scaled(&SymPoly::from_const(&w_poly), -1.0);
                    expr.add_scaled(&h, 1.0);
                    unknowns.insert(w.clone(), StrategyUnknown::Free(coeffs));
                }
            }
        }
    }
    b.require_sos("decrease", expr, &all_idx);

    let mut prog = b.finish(order, n, epsilon, scaling);
    prog.barrier = barrier_coeffs;
    prog.strategies = unknowns;
    Ok(prog)
}

/// Candidate fixed strategies per existential input: mirrors of the same
/// input in earlier universal copies, the center of the input box, then
/// user-supplied expressions. Returns the Cartesian product in order.
pub fn strategy_candidates(
    aug: &AugmentedSystem,
    prefix: &[Quantifier],
    user: &BTreeMap<String, Vec<Polynomial>>,
) -> Vec<BTreeMap<String, Polynomial>> {
    let bx = aug.base.sampling_box();
    let mut per_input: Vec<(String, Vec<Polynomial>)> = Vec::new();
    for (i, q) in prefix.iter().enumerate() {
        if *q == Quantifier::Forall {
            continue;
        }
        for u in &aug.base.input_vars {
            let w = copy_var(u, i + 1);
            let mut opts = Vec::new();
            for (k, qk) in prefix.iter().enumerate().take(i) {
                if *qk == Quantifier::Forall {
                    opts.push(Polynomial::var(&copy_var(u, k + 1)));
                }
            }
            if let Some((lo, hi)) = bx.get(u) {
                opts.push(Polynomial::constant(0.5 * (lo + hi)));
            }
            for h in user.get(&w).into_iter().flatten() {
                if !opts.contains(h) {
                    opts.push(h.clone());
                }
            }
            per_input.push((w, opts));
        }
    }
    let mut out = vec![BTreeMap::new()];
    for (w, opts) in per_input {
        let mut next = Vec::new();
        for partial in &out {
            for h in &opts {
                let mut m: BTreeMap<String, Polynomial> = partial.clone();
                m.insert(w.clone(), h.clone());
                next.push(m);
            }
        }
        out = next;
    }
    out
}
