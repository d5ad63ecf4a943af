use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::poly::CompiledPoly;
use super::{PolyError, Polynomial};

/// Membership slack used when testing `g(x) >= 0` on sampled points.
pub const MEMBERSHIP_SLACK: f64 = 1e-10;

/// Returns `-g - gap`, whose nonnegativity set sits strictly inside `{g < 0}`.
pub fn negate_inequality(g: &Polynomial, gap: f64) -> Result<Polynomial, PolyError> {
    if gap.is_nan() || gap <= 0.0 || !gap.is_finite() {
        return Err(PolyError::NonpositiveGap(gap));
    }
    Ok(-g - &Polynomial::constant(gap))
}

fn sorted_union<'a>(
    a: impl IntoIterator<Item = &'a String>,
    b: impl IntoIterator<Item = &'a String>,
) -> Vec<String> {
    a.into_iter()
        .chain(b)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Conjunction `g_i(x) >= 0` over a fixed set of dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicSet {
    gs: Vec<Polynomial>,
    dim_vars: Vec<String>,
}

impl BasicSet {
    pub fn new(gs: Vec<Polynomial>, dim_vars: &[String]) -> Result<Self, PolyError> {
        let dims: BTreeSet<&String> = dim_vars.iter().collect();
        for g in &gs {
            if let Some(v) = g.vars().iter().find(|v| !dims.contains(v)) {
                return Err(PolyError::UnknownVariable(v.clone()));
            }
        }
        Ok(BasicSet {
            gs,
            dim_vars: dims.into_iter().cloned().collect(),
        })
    }

    pub fn full(dim_vars: &[String]) -> Self {
        BasicSet::new(Vec::new(), dim_vars).expect("no constraints")
    }

    pub fn empty(dim_vars: &[String]) -> Self {
        BasicSet::new(vec![Polynomial::constant(-1.0)], dim_vars).expect("constant constraint")
    }

    pub fn gs(&self) -> &[Polynomial] {
        &self.gs
    }

    pub fn dim_vars(&self) -> &[String] {
        &self.dim_vars
    }

    pub fn is_trivially_full(&self) -> bool {
        self.gs
            .iter()
            .all(|g| g.vars().is_empty() && g.constant_term() >= 0.0)
    }

    pub fn with_dims(mut self, dims: &[String]) -> Self {
        self.dim_vars = sorted_union(&self.dim_vars, dims);
        self
    }

    pub fn intersect(&self, other: &BasicSet) -> BasicSet {
        let mut gs = self.gs.clone();
        for g in &other.gs {
            if !gs.contains(g) {
                gs.push(g.clone());
            }
        }
        BasicSet {
            gs,
            dim_vars: sorted_union(&self.dim_vars, &other.dim_vars),
        }
    }

    /// De Morgan complement: one clause per constraint, each negated with `gap`.
    pub fn complement(&self, gap: f64) -> Result<SemialgebraicRegion, PolyError> {
        if self.gs.is_empty() {
            negate_inequality(&Polynomial::zero(), gap)?;
            return Ok(SemialgebraicRegion::empty(&self.dim_vars));
        }
        let clauses = self
            .gs
            .iter()
            .map(|g| {
                Ok(BasicSet {
                    gs: vec![negate_inequality(g, gap)?],
                    dim_vars: self.dim_vars.clone(),
                })
            })
            .collect::<Result<Vec<_>, PolyError>>()?;
        SemialgebraicRegion::new(clauses)
    }

    pub fn contains(&self, point: &BTreeMap<String, f64>, slack: f64) -> Result<bool, PolyError> {
        for g in &self.gs {
            if g.eval(point)? < -slack {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn rename<F: Fn(&str) -> String>(&self, f: F) -> BasicSet {
        BasicSet {
            gs: self.gs.iter().map(|g| g.rename(&f)).collect(),
            dim_vars: self
                .dim_vars
                .iter()
                .map(|v| f(v))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        }
    }

    /// Box implied by univariate constraints of degree at most two.
    pub fn derived_box(&self) -> IntervalBox {
        let mut b = IntervalBox::default();
        for g in &self.gs {
            match g.vars().len() {
                0 => {
                    if g.constant_term() < 0.0 {
                        b.empty = true;
                    }
                }
                1 if g.degree() <= 2 => {
                    let v = &g.vars()[0];
                    match univariate_interval(g, v) {
                        UniInterval::Empty => b.empty = true,
                        UniInterval::Range(lo, hi) => b.restrict(v, lo, hi),
                        UniInterval::Unknown => {}
                    }
                }
                _ => {}
            }
        }
        b
    }

    /// [`BasicSet::derived_box`] intersected with `bounds`, further cut by
    /// univariate quadratics whose feasible set is two rays.
    pub fn box_within(&self, bounds: &IntervalBox) -> IntervalBox {
        let mut b = bounds.intersect(&self.derived_box());
        for _ in 0..2 {
            for g in &self.gs {
                if b.empty || g.vars().len() != 1 || g.degree() != 2 {
                    continue;
                }
                let v = &g.vars()[0];
                let Some((lo, hi)) = b.bounds.get(v).copied() else {
                    continue;
                };
                if let Some((r1, r2)) = exterior_gap(g, v) {
                    let left = lo <= r1;
                    let right = hi >= r2;
                    match (left, right) {
                        (false, false) => b.empty = true,
                        (true, false) => b.restrict(v, lo, r1),
                        (false, true) => b.restrict(v, r2, hi),
                        (true, true) => {}
                    }
                }
            }
        }
        b
    }

    pub fn compile(&self, order: &[String]) -> Result<CompiledSet, PolyError> {
        Ok(CompiledSet {
            gs: self
                .gs
                .iter()
                .map(|g| g.compile(order))
                .collect::<Result<_, _>>()?,
        })
    }
}

enum UniInterval {
    Empty,
    Range(f64, f64),
    Unknown,
}

fn widen(x: f64) -> f64 {
    1e-9 * (1.0 + x.abs())
}

fn univariate_interval(g: &Polynomial, v: &str) -> UniInterval {
    let a = g.coefficient(&[(v, 2)]);
    let b = g.coefficient(&[(v, 1)]);
    let c = g.constant_term();
    if a == 0.0 {
        if b > 0.0 {
            let r = -c / b;
            return UniInterval::Range(r - widen(r), f64::INFINITY);
        }
        let r = -c / b;
        return UniInterval::Range(f64::NEG_INFINITY, r + widen(r));
    }
    if a > 0.0 {
        return UniInterval::Unknown;
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc.abs() <= 1e-12 * b * b {
            disc = 0.0;
        } else {
            return UniInterval::Empty;
        }
    }
    let s = disc.sqrt();
    let (r1, r2) = ((-b + s) / (2.0 * a), (-b - s) / (2.0 * a));
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    UniInterval::Range(lo - widen(lo), hi + widen(hi))
}

/// Open interval `(r1, r2)` excluded by a convex univariate quadratic `g ≥ 0`,
/// shrunk slightly so boundary points stay feasible.
fn exterior_gap(g: &Polynomial, v: &str) -> Option<(f64, f64)> {
    let a = g.coefficient(&[(v, 2)]);
    let b = g.coefficient(&[(v, 1)]);
    let c = g.constant_term();
    if a <= 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (r1, r2) = ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a));
    Some((r1 + widen(r1), r2 - widen(r2)))
}

/// Per-variable closed intervals. Absent variables are unbounded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    bounds: BTreeMap<String, (f64, f64)>,
    #[serde(default)]
    empty: bool,
}

impl IntervalBox {
    pub fn from_bounds(bounds: BTreeMap<String, (f64, f64)>) -> Self {
        let mut b = IntervalBox::default();
        for (v, (lo, hi)) in bounds {
            b.restrict(&v, lo, hi);
        }
        b
    }

    pub fn restrict(&mut self, var: &str, lo: f64, hi: f64) {
        let e = self
            .bounds
            .entry(var.to_string())
            .or_insert((f64::NEG_INFINITY, f64::INFINITY));
        e.0 = e.0.max(lo);
        e.1 = e.1.min(hi);
        if e.0 > e.1 {
            self.empty = true;
        }
    }

    pub fn intersect(&self, other: &IntervalBox) -> IntervalBox {
        let mut out = self.clone();
        out.empty |= other.empty;
        for (v, &(lo, hi)) in &other.bounds {
            out.restrict(v, lo, hi);
        }
        out
    }

    pub fn get(&self, var: &str) -> Option<(f64, f64)> {
        self.bounds
            .get(var)
            .copied()
            .filter(|(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn bounds(&self) -> &BTreeMap<String, (f64, f64)> {
        &self.bounds
    }

    pub fn rename<F: Fn(&str) -> String>(&self, f: F) -> IntervalBox {
        IntervalBox {
            bounds: self.bounds.iter().map(|(k, v)| (f(k), *v)).collect(),
            empty: self.empty,
        }
    }

    pub fn sampler(&self, vars: &[String]) -> Result<BoxSampler, PolyError> {
        let mut lo = Vec::with_capacity(vars.len());
        let mut hi = Vec::with_capacity(vars.len());
        for v in vars {
            let (l, h) = self.get(v).ok_or_else(|| PolyError::Unbounded(v.clone()))?;
            lo.push(l);
            hi.push(h);
        }
        Ok(BoxSampler {
            vars: vars.to_vec(),
            lo,
            hi,
        })
    }
}

/// Grid and uniform sampling over a bounded box in a fixed variable order.
#[derive(Clone, Debug)]
pub struct BoxSampler {
    vars: Vec<String>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSampler {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    /// Regular grid including the endpoints, at most `max_points` points.
    pub fn grid(&self, max_points: usize) -> Vec<Vec<f64>> {
        let wide: Vec<usize> = (0..self.vars.len())
            .filter(|&i| self.hi[i] > self.lo[i])
            .collect();
        let per_dim = if wide.is_empty() {
            1
        } else {
            let mut k = (max_points.max(1) as f64)
                .powf(1.0 / wide.len() as f64)
                .floor() as usize;
            while k > 1
                && k.checked_pow(wide.len() as u32)
                    .is_none_or(|n| n > max_points)
            {
                k -= 1;
            }
            k.max(1)
        };
        let axis = |i: usize| -> Vec<f64> {
            if self.hi[i] <= self.lo[i] || per_dim == 1 {
                vec![0.5 * (self.lo[i] + self.hi[i])]
            } else {
                (0..per_dim)
                    .map(|k| {
                        self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (per_dim - 1) as f64
                    })
                    .collect()
            }
        };
        let axes: Vec<Vec<f64>> = (0..self.vars.len()).map(axis).collect();
        let mut out = vec![Vec::with_capacity(self.vars.len())];
        for ax in &axes {
            let mut next = Vec::with_capacity(out.len() * ax.len());
            for prefix in &out {
                for &x in ax {
                    let mut p = prefix.clone();
                    p.push(x);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if h > l { rng.random_range(l..=h) } else { l })
            .collect()
    }

    pub fn to_map(&self, x: &[f64]) -> BTreeMap<String, f64> {
        self.vars.iter().cloned().zip(x.iter().copied()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CompiledSet {
    gs: Vec<CompiledPoly>,
}

impl CompiledSet {
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.gs.iter().all(|g| g.eval(x) >= -slack)
    }

    /// Largest violation `max(-g_i(x))`, nonpositive inside the set.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.gs
            .iter()
            .map(|g| -g.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Finite union of basic sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemialgebraicRegion {
    clauses: Vec<BasicSet>,
    dim_vars: Vec<String>,
}

impl SemialgebraicRegion {
    pub fn new(clauses: Vec<BasicSet>) -> Result<Self, PolyError> {
        if clauses.is_empty() {
            return Err(PolyError::EmptyRegion);
        }
        let dims: BTreeSet<String> = clauses
            .iter()
            .flat_map(|c| c.dim_vars.iter().cloned())
            .collect();
        let dims: Vec<String> = dims.into_iter().collect();
        let clauses = clauses.into_iter().map(|c| c.with_dims(&dims)).collect();
        Ok(SemialgebraicRegion {
            clauses,
            dim_vars: dims,
        })
    }

    pub fn full(dim_vars: &[String]) -> Self {
        SemialgebraicRegion::from_basic(BasicSet::full(dim_vars))
    }

    pub fn empty(dim_vars: &[String]) -> Self {
        SemialgebraicRegion::from_basic(BasicSet::empty(dim_vars))
    }

    pub fn from_basic(b: BasicSet) -> Self {
        SemialgebraicRegion {
            dim_vars: b.dim_vars.clone(),
            clauses: vec![b],
        }
    }

    pub fn clauses(&self) -> &[BasicSet] {
        &self.clauses
    }

    pub fn dim_vars(&self) -> &[String] {
        &self.dim_vars
    }

    pub fn union(&self, other: &SemialgebraicRegion) -> SemialgebraicRegion {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        SemialgebraicRegion::new(clauses).expect("nonempty")
    }

    pub fn intersect(&self, other: &SemialgebraicRegion) -> SemialgebraicRegion {
        let clauses = self
            .clauses
            .iter()
            .flat_map(|a| other.clauses.iter().map(move |b| a.intersect(b)))
            .collect();
        SemialgebraicRegion::new(clauses).expect("nonempty")
    }

    pub fn intersect_basic(&self, b: &BasicSet) -> SemialgebraicRegion {
        self.intersect(&SemialgebraicRegion::from_basic(b.clone()))
    }

    pub fn complement(&self, gap: f64) -> Result<SemialgebraicRegion, PolyError> {
        let mut acc: Option<SemialgebraicRegion> = None;
        for c in &self.clauses {
            let comp = c.complement(gap)?;
            acc = Some(match acc {
                None => comp,
                Some(a) => a.intersect(&comp),
            });
        }
        Ok(acc.expect("nonempty").with_dims(&self.dim_vars))
    }

    pub fn with_dims(self, dims: &[String]) -> SemialgebraicRegion {
        SemialgebraicRegion::new(
            self.clauses
                .into_iter()
                .map(|c| c.with_dims(dims))
                .collect(),
        )
        .expect("nonempty")
    }

    pub fn contains(&self, point: &BTreeMap<String, f64>, slack: f64) -> Result<bool, PolyError> {
        for c in &self.clauses {
            if c.contains(point, slack)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn rename<F: Fn(&str) -> String>(&self, f: F) -> SemialgebraicRegion {
        SemialgebraicRegion::new(self.clauses.iter().map(|c| c.rename(&f)).collect())
            .expect("nonempty")
    }

    /// Clauses whose derived box (within `bounds`) is not provably empty.
    pub fn live_clauses(&self, bounds: &IntervalBox) -> Vec<&BasicSet> {
        self.clauses
            .iter()
            .filter(|c| !c.box_within(bounds).is_empty())
            .collect()
    }

    /// True when box reasoning shows every clause is empty.
    pub fn provably_empty(&self, bounds: &IntervalBox) -> bool {
        self.live_clauses(bounds).is_empty()
    }
}

/// Searches `r1 ∩ r2` for a point by sampling inside `bounds`.
///
/// Box centers of each clause pair are tried first, then grid and seeded
/// random points, for at most `budget` candidate points in total.
pub fn region_overlap_witness(
    r1: &SemialgebraicRegion,
    r2: &SemialgebraicRegion,
    bounds: &IntervalBox,
    budget: usize,
    seed: u64,
) -> Result<Option<BTreeMap<String, f64>>, PolyError> {
    let vars = sorted_union(r1.dim_vars(), r2.dim_vars());
    let mut pairs = Vec::new();
    for a in r1.clauses() {
        for b in r2.clauses() {
            let inter = a.intersect(b);
            let bx = inter.box_within(bounds);
            if bx.is_empty() {
                continue;
            }
            let sampler = bx.sampler(&vars)?;
            let set = inter.compile(&vars)?;
            pairs.push((sampler, set));
        }
    }
    if pairs.is_empty() || budget == 0 {
        return Ok(None);
    }
    let mut spent = 0usize;
    for (sampler, set) in &pairs {
        let c = sampler.center();
        spent += 1;
        if set.contains(&c, MEMBERSHIP_SLACK) {
            return Ok(Some(sampler.to_map(&c)));
        }
        if spent >= budget {
            return Ok(None);
        }
    }
    let share = ((budget - spent) / pairs.len()).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (sampler, set) in &pairs {
        for x in sampler.grid(share / 2) {
            if set.contains(&x, MEMBERSHIP_SLACK) {
                return Ok(Some(sampler.to_map(&x)));
            }
        }
        for _ in 0..share - share / 2 {
            let x = sampler.random(&mut rng);
            if set.contains(&x, MEMBERSHIP_SLACK) {
                return Ok(Some(sampler.to_map(&x)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn dims(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn negation_of_joint_closeness() {
        let g = p("0.0225 - (v__1 - v__2)^2");
        let n = negate_inequality(&g, 0.01).unwrap();
        assert_eq!(n, p("(v__1 - v__2)^2 - 0.0325"));
        let e = negate_inequality(&Polynomial::constant(-1.0), 0.01).unwrap();
        assert_eq!(e, Polynomial::constant(0.99));
        assert!(matches!(
            negate_inequality(&g, 0.0),
            Err(PolyError::NonpositiveGap(_))
        ));
    }

    #[test]
    fn double_negation_restores_constraint() {
        let g = p("(x - 1)*(3 - x)");
        let once = negate_inequality(&g, 0.1).unwrap();
        let twice = negate_inequality(&once, 0.1).unwrap();
        for k in 0..=400 {
            let x = k as f64 / 100.0;
            let pt = BTreeMap::from([("x".to_string(), x)]);
            let (a, b, c) = (
                g.eval(&pt).unwrap(),
                once.eval(&pt).unwrap(),
                twice.eval(&pt).unwrap(),
            );
            assert!((a - c).abs() < 1e-12);
            // the two gapped sides never overlap
            assert!(!(a >= 0.0 && b >= 0.0));
        }
    }

    #[test]
    fn exterior_quadratic_cuts_box() {
        let b = BasicSet::new(
            vec![p("(T - 20)*(T - 25) - 0.001"), p("(T - 20.5)*(21.5 - T)")],
            &dims(&["T"]),
        )
        .unwrap();
        assert!(b.box_within(&IntervalBox::default()).is_empty());
        let b = BasicSet::new(vec![p("(T - 20)*(T - 25)")], &dims(&["T"])).unwrap();
        let bx = b.box_within(&IntervalBox::from_bounds(BTreeMap::from([(
            "T".to_string(),
            (22.0, 35.0),
        )])));
        let (lo, hi) = bx.get("T").unwrap();
        assert!((lo - 25.0).abs() < 1e-6 && hi == 35.0);
    }

    #[test]
    fn box_from_quadratics() {
        let b = BasicSet::new(vec![p("s*(8 - s)"), p("-(T - 21)^2")], &dims(&["s", "T"])).unwrap();
        let bx = b.derived_box();
        let (lo, hi) = bx.get("s").unwrap();
        assert!((-1e-6..=0.0).contains(&lo) && (8.0..8.0 + 1e-6).contains(&hi));
        let (lo, hi) = bx.get("T").unwrap();
        assert!((lo - 21.0).abs() < 1e-6 && (hi - 21.0).abs() < 1e-6);
        let empty = BasicSet::new(vec![p("-x^2 - 1")], &dims(&["x"])).unwrap();
        assert!(empty.derived_box().is_empty());
        let outside = BasicSet::new(vec![p("x^2 - 1")], &dims(&["x"])).unwrap();
        assert!(outside.derived_box().get("x").is_none());
    }

    #[test]
    fn complement_of_conjunction_is_union() {
        let b = BasicSet::new(vec![p("x"), p("1 - x")], &dims(&["x"])).unwrap();
        let c = b.complement(0.01).unwrap();
        assert_eq!(c.clauses().len(), 2);
        let at = |x: f64| BTreeMap::from([("x".to_string(), x)]);
        assert!(c.contains(&at(-0.5), 0.0).unwrap());
        assert!(c.contains(&at(1.5), 0.0).unwrap());
        assert!(!c.contains(&at(0.5), 0.0).unwrap());
        assert!(!c.contains(&at(1.005), 0.0).unwrap());
        let full = SemialgebraicRegion::full(&dims(&["x"]));
        assert!(full
            .complement(0.01)
            .unwrap()
            .provably_empty(&IntervalBox::default()));
    }

    #[test]
    fn overlap_witness_cases() {
        let x = dims(&["x"]);
        let bounds = IntervalBox::from_bounds(BTreeMap::from([("x".to_string(), (-1.0, 4.0))]));
        let a = SemialgebraicRegion::from_basic(BasicSet::new(vec![p("x*(1 - x)")], &x).unwrap());
        let b =
            SemialgebraicRegion::from_basic(BasicSet::new(vec![p("(x - 2)*(3 - x)")], &x).unwrap());
        assert!(region_overlap_witness(&a, &b, &bounds, 1000, 7)
            .unwrap()
            .is_none());
        let unit = IntervalBox::from_bounds(BTreeMap::from([("x".to_string(), (0.0, 1.0))]));
        let w = region_overlap_witness(&a, &a, &unit, 1, 7)
            .unwrap()
            .unwrap();
        assert_eq!(w["x"], 0.5);
        let unbounded = IntervalBox::default();
        let open = SemialgebraicRegion::full(&x);
        assert!(matches!(
            region_overlap_witness(&open, &open, &unbounded, 10, 0),
            Err(PolyError::Unbounded(_))
        ));
    }

    #[test]
    fn grid_respects_cap_and_degenerate_axes() {
        let bx = IntervalBox::from_bounds(BTreeMap::from([
            ("a".to_string(), (0.0, 1.0)),
            ("b".to_string(), (2.0, 2.0)),
            ("c".to_string(), (0.0, 1.0)),
        ]));
        let s = bx.sampler(&dims(&["a", "b", "c"])).unwrap();
        let g = s.grid(100);
        assert_eq!(g.len(), 100);
        assert!(g.iter().all(|x| x[1] == 2.0));
    }
}
