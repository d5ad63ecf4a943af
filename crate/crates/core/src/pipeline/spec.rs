use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::label::Labeling;
use super::PipelineError;
use crate::abc::SamplerConfig;
use crate::automata::Guard;
use crate::formula::{parse_hyperltl, AtomDecls, HyperLtlFormula};
use crate::polysys::{
    parse_polynomial, self_compose, AugmentedSystem, BasicSet, DynamicalSystem, Polynomial,
};
use crate::sos::{Degrees, DEFAULT_REGULARIZATION};

pub const SPEC_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub state_vars: Vec<String>,
    #[serde(default)]
    pub input_vars: Vec<String>,
    /// One expression per state variable.
    pub dynamics: Vec<String>,
    /// Constraints `g ≥ 0` describing `X`.
    #[serde(default)]
    pub state_set: Vec<String>,
    /// Constraints `g ≥ 0` describing `W`.
    #[serde(default)]
    pub input_set: Vec<String>,
    #[serde(default)]
    pub bounds: BTreeMap<String, (f64, f64)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomScope {
    /// Over one copy of the state variables.
    #[default]
    Single,
    /// Over several copies; constraints use `v__1`, `v__2`, … for the
    /// first, second, … trace argument.
    Joint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(default)]
    pub scope: AtomScope,
    /// Number of trace arguments; defaults to 1 for single and 2 for joint.
    #[serde(default)]
    pub arity: Option<usize>,
    pub gs: Vec<String>,
}

impl AtomSpec {
    pub fn arity(&self) -> usize {
        self.arity.unwrap_or(match self.scope {
            AtomScope::Single => 1,
            AtomScope::Joint => 2,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Per-lasso certificates for ∀*∃* prefixes with deterministic
    /// automata, otherwise one common certificate.
    #[default]
    Auto,
    General,
    ForallExists,
    Rabin,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyEncoding {
    /// Candidate strategies are fixed in turn; the equality term gets a free
    /// polynomial multiplier.
    #[default]
    FixedMultiplier,
    /// Strategy coefficients are unknowns and the equality term has
    /// multiplier one.
    LinearSlack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub degrees: Degrees,
    /// Margin of the unsafe condition.
    pub epsilon: f64,
    /// Gap used when negating an atom constraint.
    pub negation_gap: f64,
    /// Tolerance of the sampled checks on synthesized certificates.
    pub check_tol: f64,
    /// Tolerance of the Gram eigenvalue and residual checks.
    pub gram_tol: f64,
    pub sampler: SamplerConfig,
    pub regularization: f64,
    pub sdp_solver: Option<String>,
    pub assumed_unreachable_initial_guards: Vec<String>,
    pub automaton_override: Option<String>,
    pub algorithm: Algorithm,
    pub strategy_encoding: StrategyEncoding,
    /// Extra candidate strategies per existential input copy, e.g. `w__2`.
    pub strategy_candidates: BTreeMap<String, Vec<String>>,
    pub selection_budget: usize,
    pub overlap_budget: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            degrees: Degrees::default(),
            epsilon: 0.01,
            negation_gap: 0.01,
            check_tol: 1e-6,
            gram_tol: 1e-6,
            sampler: SamplerConfig::default(),
            regularization: DEFAULT_REGULARIZATION,
            sdp_solver: None,
            assumed_unreachable_initial_guards: Vec::new(),
            automaton_override: None,
            algorithm: Algorithm::Auto,
            strategy_encoding: StrategyEncoding::FixedMultiplier,
            strategy_candidates: BTreeMap::new(),
            selection_budget: 64,
            overlap_budget: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub system: SystemSpec,
    pub atoms: BTreeMap<String, AtomSpec>,
    pub formula: String,
    #[serde(default)]
    pub options: Options,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_version() -> u32 {
    SPEC_VERSION
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        if spec.version != SPEC_VERSION {
            return Err(PipelineError::Spec(format!(
                "unsupported spec version {}, expected {SPEC_VERSION}",
                spec.version
            )));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Spec(format!("cannot read {}: {e}", path.display())))?;
        let mut spec = Self::from_json(&text)?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        match &self.base_dir {
            Some(d) if Path::new(rel).is_relative() => d.join(rel),
            _ => PathBuf::from(rel),
        }
    }

    pub fn decls(&self) -> AtomDecls {
        AtomDecls::new(self.atoms.iter().map(|(n, a)| (n.clone(), a.arity())))
    }
}

/// A spec with parsed system, formula and atom labeling.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub system: DynamicalSystem,
    pub formula: HyperLtlFormula,
    pub aug: AugmentedSystem,
    pub labeling: Labeling,
    pub assumed_guards: Vec<Guard>,
    pub user_strategies: BTreeMap<String, Vec<Polynomial>>,
}

fn parse_all(srcs: &[String], allowed: &[String]) -> Result<Vec<Polynomial>, PipelineError> {
    srcs.iter()
        .map(|s| Ok(parse_polynomial(s, allowed)?))
        .collect()
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self, PipelineError> {
        let s = &spec.system;
        let all: Vec<String> = s.state_vars.iter().chain(&s.input_vars).cloned().collect();
        let f = parse_all(&s.dynamics, &all)?;
        let state_set = BasicSet::new(parse_all(&s.state_set, &s.state_vars)?, &s.state_vars)?;
        let input_set = BasicSet::new(parse_all(&s.input_set, &s.input_vars)?, &s.input_vars)?;
        let system = DynamicalSystem::new(
            s.state_vars.clone(),
            s.input_vars.clone(),
            f,
            state_set,
            input_set,
        )?
        .with_bounds(s.bounds.clone());
        let formula = parse_hyperltl(&spec.formula, &spec.decls())?;
        let aug = self_compose(&system, formula.prefix.len())?;
        let labeling = Labeling::new(&spec, &formula, &aug)?;
        let assumed_guards = spec
            .options
            .assumed_unreachable_initial_guards
            .iter()
            .map(|g| labeling.parse_guard(g, &spec.decls()))
            .collect::<Result<_, _>>()?;
        let mut user_strategies = BTreeMap::new();
        for (w, hs) in &spec.options.strategy_candidates {
            let ps = hs
                .iter()
                .map(|h| h.parse::<Polynomial>())
                .collect::<Result<Vec<_>, _>>()?;
            user_strategies.insert(w.clone(), ps);
        }
        Ok(Problem {
            spec,
            system,
            formula,
            aug,
            labeling,
            assumed_guards,
            user_strategies,
        })
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        Self::new(ProblemSpec::load(path)?)
    }
}
