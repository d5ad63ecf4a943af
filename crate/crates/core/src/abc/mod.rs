//! Augmented barrier certificates: conditional invariances, candidate
//! certificates with strategies, and sampling-based falsification of the
//! three defining conditions.

mod check;
mod simulate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::TransitionPair;
use crate::formula::Quantifier;
use crate::polysys::{PolyError, Polynomial, SemialgebraicRegion};

pub use check::{
    check_ci, check_classic_bc, check_decrease, check_initial, check_unsafe, condition_value,
    CiReport,
};
pub use simulate::{simulate, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbcError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("no strategy given for existential input '{0}'")]
    MissingStrategy(String),
    #[error("strategy for '{input}' may not depend on '{var}'")]
    StrategyScope { input: String, var: String },
    #[error("certificate mentions '{0}', which is not an augmented state variable")]
    BarrierScope(String),
    #[error("quantifier prefix has {found} entries but the system has {expected} copies")]
    PrefixMismatch { expected: usize, found: usize },
}

/// `□(s_A → □¬s_B)` over the augmented state, as a pair of regions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalInvariance {
    pub prefix: Vec<Quantifier>,
    pub set_a: SemialgebraicRegion,
    pub set_b: SemialgebraicRegion,
    pub provenance: Option<TransitionPair>,
}

/// Barrier polynomial over the augmented state plus one strategy per
/// existentially quantified input coordinate (keyed by its copy name, e.g. `w__2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCandidate {
    pub barrier: Polynomial,
    #[serde(default)]
    pub strategies: BTreeMap<String, Polynomial>,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Initial,
    Unsafe,
    Decrease,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Initial => "initial",
            Condition::Unsafe => "unsafe",
            Condition::Decrease => "decrease",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// What to do when a strategy value leaves the input set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyPolicy {
    /// Leaving the input set fails the decrease check.
    #[default]
    Enforce,
    /// Leaving the input set is recorded but does not change the verdict.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Grid points per sampled dimension.
    pub grid_per_dim: usize,
    /// Cap on the total grid size.
    pub max_grid_points: usize,
    /// Random samples to collect inside the region.
    pub random_samples: usize,
    /// Cap on rejection-sampling draws.
    pub max_draws: usize,
    pub seed: u64,
    pub tol: f64,
    pub strategy_policy: StrategyPolicy,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            grid_per_dim: 20,
            max_grid_points: 100_000,
            random_samples: 10_000,
            max_draws: 2_000_000,
            seed: 0,
            tol: 1e-8,
            strategy_policy: StrategyPolicy::Enforce,
        }
    }
}

impl SamplerConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Whether strategy values stayed inside the input set on every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyFeasibility {
    pub ok: bool,
    /// Largest constraint violation `max(-g_in)` seen; nonpositive when feasible.
    pub worst_excess: f64,
    pub witness: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub condition: Condition,
    pub verdict: Verdict,
    pub samples_tried: usize,
    pub samples_in_region: usize,
    /// Maximum of the condition value over the samples; the check fails when
    /// it exceeds `tol`.
    pub worst_violation: Option<f64>,
    pub witness: Option<BTreeMap<String, f64>>,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy_feasibility: Option<StrategyFeasibility>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
