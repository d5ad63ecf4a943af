use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::region::{BasicSet, IntervalBox};
use super::{PolyError, Polynomial};

/// Name of variable `v` in trace copy `i` (1-based).
pub fn copy_var(v: &str, i: usize) -> String {
    format!("{v}__{i}")
}

/// Splits `v__i` into `(v, i)`.
pub fn split_copy_var(name: &str) -> Option<(&str, usize)> {
    let (base, idx) = name.rsplit_once("__")?;
    let i = idx.parse().ok()?;
    if base.is_empty() || i == 0 {
        return None;
    }
    Some((base, i))
}

/// Discrete-time polynomial system `x' = f(x, w)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicalSystem {
    pub state_vars: Vec<String>,
    pub input_vars: Vec<String>,
    pub f: Vec<Polynomial>,
    pub state_set: BasicSet,
    pub input_set: BasicSet,
    /// Explicit sampling bounds for variables without a range constraint.
    #[serde(default)]
    pub bounds: BTreeMap<String, (f64, f64)>,
}

impl DynamicalSystem {
    pub fn new(
        state_vars: Vec<String>,
        input_vars: Vec<String>,
        f: Vec<Polynomial>,
        state_set: BasicSet,
        input_set: BasicSet,
    ) -> Result<Self, PolyError> {
        if f.len() != state_vars.len() {
            return Err(PolyError::DimensionMismatch {
                expected: state_vars.len(),
                found: f.len(),
            });
        }
        let all: Vec<String> = state_vars.iter().chain(&input_vars).cloned().collect();
        for fi in &f {
            if let Some(v) = fi.vars().iter().find(|v| !all.contains(v)) {
                return Err(PolyError::UnknownVariable(v.clone()));
            }
        }
        if let Some(v) = state_set
            .dim_vars()
            .iter()
            .find(|v| !state_vars.contains(v))
        {
            return Err(PolyError::UnknownVariable(v.clone()));
        }
        if let Some(v) = input_set
            .dim_vars()
            .iter()
            .find(|v| !input_vars.contains(v))
        {
            return Err(PolyError::UnknownVariable(v.clone()));
        }
        let state_set = state_set.with_dims(&state_vars);
        let input_set = input_set.with_dims(&input_vars);
        Ok(DynamicalSystem {
            state_vars,
            input_vars,
            f,
            state_set,
            input_set,
            bounds: BTreeMap::new(),
        })
    }

    pub fn with_bounds(mut self, bounds: BTreeMap<String, (f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn is_closed(&self) -> bool {
        self.input_vars.is_empty()
    }

    /// One step of the dynamics; `x` and `w` follow `state_vars` and `input_vars`.
    pub fn step(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>, PolyError> {
        let point: BTreeMap<String, f64> = self
            .state_vars
            .iter()
            .cloned()
            .zip(x.iter().copied())
            .chain(self.input_vars.iter().cloned().zip(w.iter().copied()))
            .collect();
        self.f.iter().map(|fi| fi.eval(&point)).collect()
    }

    /// Sampling box from range constraints plus explicit bounds.
    pub fn sampling_box(&self) -> IntervalBox {
        self.state_set
            .derived_box()
            .intersect(&self.input_set.derived_box())
            .intersect(&IntervalBox::from_bounds(self.bounds.clone()))
    }
}

/// p-fold self-composition with coordinates renamed `v__i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedSystem {
    pub p: usize,
    pub base: DynamicalSystem,
    pub state_vars: Vec<String>,
    pub input_vars: Vec<String>,
    pub f: Vec<Polynomial>,
    pub state_set: BasicSet,
    pub input_set: BasicSet,
}

pub fn self_compose(sys: &DynamicalSystem, p: usize) -> Result<AugmentedSystem, PolyError> {
    if p == 0 {
        return Err(PolyError::ZeroCopies);
    }
    let mut state_vars = Vec::new();
    let mut input_vars = Vec::new();
    let mut f = Vec::new();
    let mut state_set: Option<BasicSet> = None;
    let mut input_set: Option<BasicSet> = None;
    for i in 1..=p {
        let rn = |v: &str| copy_var(v, i);
        state_vars.extend(sys.state_vars.iter().map(|v| rn(v)));
        input_vars.extend(sys.input_vars.iter().map(|v| rn(v)));
        f.extend(sys.f.iter().map(|fi| fi.rename(rn)));
        let xs = sys.state_set.rename(rn);
        let ws = sys.input_set.rename(rn);
        state_set = Some(match state_set {
            None => xs,
            Some(s) => s.intersect(&xs),
        });
        input_set = Some(match input_set {
            None => ws,
            Some(s) => s.intersect(&ws),
        });
    }
    Ok(AugmentedSystem {
        p,
        base: sys.clone(),
        state_set: state_set.expect("p >= 1").with_dims(&state_vars),
        input_set: input_set.expect("p >= 1").with_dims(&input_vars),
        state_vars,
        input_vars,
        f,
    })
}

impl AugmentedSystem {
    /// State variables of copy `i` (1-based).
    pub fn copy_state_vars(&self, i: usize) -> Vec<String> {
        self.base
            .state_vars
            .iter()
            .map(|v| copy_var(v, i))
            .collect()
    }

    pub fn copy_input_vars(&self, i: usize) -> Vec<String> {
        self.base
            .input_vars
            .iter()
            .map(|v| copy_var(v, i))
            .collect()
    }

    /// Input constraints of copy `i` only.
    pub fn copy_input_set(&self, i: usize) -> BasicSet {
        self.base.input_set.rename(|v| copy_var(v, i))
    }

    pub fn is_closed(&self) -> bool {
        self.input_vars.is_empty()
    }

    /// Box over all augmented state and input variables.
    pub fn sampling_box(&self) -> IntervalBox {
        let base = self.base.sampling_box();
        let mut out = IntervalBox::default();
        for i in 1..=self.p {
            out = out.intersect(&base.rename(|v| copy_var(v, i)));
        }
        out
    }

    /// Substitution map `x__i -> f_p component`, used to compose `B(f_p)`.
    pub fn transition_map(&self) -> BTreeMap<String, Polynomial> {
        self.state_vars
            .iter()
            .cloned()
            .zip(self.f.iter().cloned())
            .collect()
    }
}
