use std::collections::BTreeMap;

use serde::Serialize;

use super::spec::{AtomScope, ProblemSpec};
use super::PipelineError;
use crate::abc::ConditionalInvariance;
use crate::automata::{Guard, TransitionPair};
use crate::formula::{parse_ltl_body, AtomDecls, HyperLtlFormula, IndexedAtom};
use crate::polysys::{
    copy_var, parse_polynomial, split_copy_var, AugmentedSystem, BasicSet, Polynomial,
    SemialgebraicRegion,
};

/// Maps indexed atoms to semialgebraic sets over the augmented state.
#[derive(Clone, Debug, Serialize)]
pub struct Labeling {
    defs: BTreeMap<String, (AtomScope, usize, Vec<Polynomial>)>,
    traces: BTreeMap<String, usize>,
    dims: Vec<String>,
    base_vars: Vec<String>,
    gap: f64,
}

impl Labeling {
    pub fn new(
        spec: &ProblemSpec,
        formula: &HyperLtlFormula,
        aug: &AugmentedSystem,
    ) -> Result<Self, PipelineError> {
        let base_vars = aug.base.state_vars.clone();
        let mut defs = BTreeMap::new();
        for (name, a) in &spec.atoms {
            let arity = a.arity();
            let allowed: Vec<String> = match a.scope {
                AtomScope::Single => base_vars.clone(),
                AtomScope::Joint => (1..=arity)
                    .flat_map(|k| base_vars.iter().map(move |v| copy_var(v, k)))
                    .collect(),
            };
            if a.scope == AtomScope::Single && arity != 1 {
                return Err(PipelineError::Spec(format!(
                    "single atom '{name}' must have arity 1"
                )));
            }
            let gs =
                a.gs.iter()
                    .map(|g| parse_polynomial(g, &allowed))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| PipelineError::Spec(format!("atom '{name}': {e}")))?;
            defs.insert(name.clone(), (a.scope, arity, gs));
        }
        let traces = formula
            .prefix
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (v.clone(), i + 1))
            .collect();
        Ok(Labeling {
            defs,
            traces,
            dims: aug.state_vars.clone(),
            base_vars,
            gap: spec.options.negation_gap,
        })
    }

    pub fn dims(&self) -> &[String] {
        &self.dims
    }

    pub fn knows(&self, atom: &IndexedAtom) -> bool {
        self.atom_set(atom).is_ok()
    }

    /// Constraint set of one indexed atom.
    pub fn atom_set(&self, atom: &IndexedAtom) -> Result<BasicSet, PipelineError> {
        let (scope, arity, gs) = self
            .defs
            .get(&atom.name)
            .ok_or_else(|| PipelineError::Spec(format!("atom '{}' is not declared", atom.name)))?;
        if atom.traces.len() != *arity {
            return Err(PipelineError::Spec(format!(
                "atom '{}' takes {arity} trace argument(s), got {}",
                atom.name,
                atom.traces.len()
            )));
        }
        let copies: Vec<usize> =
            atom.traces
                .iter()
                .map(|t| {
                    self.traces.get(t).copied().ok_or_else(|| {
                        PipelineError::Spec(format!("trace '{t}' is not quantified"))
                    })
                })
                .collect::<Result<_, _>>()?;
        let renamed: Vec<Polynomial> = match scope {
            AtomScope::Single => gs
                .iter()
                .map(|g| g.rename(|v| copy_var(v, copies[0])))
                .collect(),
            AtomScope::Joint => gs
                .iter()
                .map(|g| {
                    g.rename(|v| match split_copy_var(v) {
                        Some((base, k)) => copy_var(base, copies[k - 1]),
                        None => v.to_string(),
                    })
                })
                .collect(),
        };
        Ok(BasicSet::new(renamed, &self.dims)?)
    }

    /// Region of the letters satisfying `g`: one clause per cube, negated
    /// atoms replaced by their gapped complements.
    pub fn guard_region(&self, g: &Guard) -> Result<SemialgebraicRegion, PipelineError> {
        let mut clauses: Vec<BasicSet> = Vec::new();
        for cube in g.cubes() {
            let mut region = SemialgebraicRegion::full(&self.dims);
            for (atom, positive) in &cube {
                let set = self.atom_set(atom)?;
                region = if *positive {
                    region.intersect_basic(&set)
                } else {
                    region.intersect(&set.complement(self.gap)?)
                };
            }
            clauses.extend(region.clauses().iter().cloned());
        }
        if clauses.is_empty() {
            return Ok(SemialgebraicRegion::empty(&self.dims));
        }
        Ok(SemialgebraicRegion::new(clauses)?.with_dims(&self.dims))
    }

    pub fn pair_ci(
        &self,
        pair: &TransitionPair,
        formula: &HyperLtlFormula,
    ) -> Result<ConditionalInvariance, PipelineError> {
        Ok(ConditionalInvariance {
            prefix: formula.quantifiers(),
            set_a: self.guard_region(&pair.s_a)?,
            set_b: self.guard_region(&pair.s_b)?,
            provenance: Some(pair.clone()),
        })
    }

    /// Parses a propositional guard over the declared atoms.
    pub fn parse_guard(&self, src: &str, decls: &AtomDecls) -> Result<Guard, PipelineError> {
        let body = parse_ltl_body(src, decls)?;
        let g = Guard::from_ltl(&body)
            .ok_or_else(|| PipelineError::Spec(format!("guard '{src}' is not propositional")))?;
        for a in g.atoms() {
            self.atom_set(&a)?;
        }
        Ok(g)
    }

    pub fn base_vars(&self) -> &[String] {
        &self.base_vars
    }
}
