//! Problem specs, decomposition of the negated property into transition
//! pairs, certificate search and verification reports.

pub mod cli;
mod label;
mod oracle;
mod spec;
mod verify;

use serde::Serialize;
use thiserror::Error;

use crate::abc::AbcError;
use crate::automata::AutomatonError;
use crate::formula::FormulaError;
use crate::polysys::PolyError;
use crate::sos::SosError;

pub use label::Labeling;
pub use oracle::{
    selection_search, AbcOracle, Attempt, CertificateRecord, Evidence, SelectionResult, SosOracle,
};
pub use spec::{
    Algorithm, AtomScope, AtomSpec, Options, Problem, ProblemSpec, StrategyEncoding, SystemSpec,
    SPEC_VERSION,
};
pub use verify::{
    decompose, negated_automaton, verify, verify_forall_exists, verify_general, verify_rabin,
    verify_with, AutomatonSummary, Decomposition, Denial, LassoEntry, NegatedAutomaton, PairEntry,
    Precheck, VerificationReport, VerificationVerdict,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid problem spec: {0}")]
    Spec(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Abc(#[from] AbcError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Machine-readable reason for an inconclusive verdict.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "cause", rename_all = "kebab-case")]
pub enum Cause {
    /// A lasso has no pair left after the pre-checks.
    NoPair {
        lasso: usize,
    },
    SdpInfeasible,
    SolverMissing,
    NondeterministicAutomaton,
    BudgetExhausted,
    GramCheckFailed,
    CheckFailed,
    SynthesisError,
}
