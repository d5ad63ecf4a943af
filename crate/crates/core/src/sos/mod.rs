//! Sum-of-squares relaxation of barrier-certificate synthesis, SDP file
//! interchange, and certificate reconstruction.

mod certificate;
mod program;
mod sdp;
mod solver;
mod symbolic;

use thiserror::Error;

use crate::polysys::PolyError;

pub use certificate::{reconstruct_certificate, validate_gram, BlockCheck, GramReport};
pub use program::{
    build_sos_program, coefficient_match, strategy_candidates, DecisionVar, Degrees, Equality,
    GramBlock, MasterExpr, Scaling, SosProgram, StrategySpec, StrategyUnknown,
};
pub use sdp::{
    decision_values, export_sdpa, import_solution, to_sdp, Entry, SdpProblem, SdpSolution,
    SolverStatus,
};
pub use solver::{find_solver, solve_program, SdpSolver, Synthesis, SOLVER_ENV};
pub use symbolic::{monomials, AffineExpr, ConstPoly, Exps, SymPoly};

/// Default weight of the free-variable regularization in the SDP objective.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SosError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("variable '{0}' is not part of the program")]
    UnknownVariable(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("monomial {0} cannot be produced by the basis; extend the basis")]
    BasisExtension(String),
    #[error("degree deficit: {0}")]
    DegreeDeficit(String),
    #[error("quantifier prefix has {found} entries, system has {expected} copies")]
    PrefixMismatch { expected: usize, found: usize },
    #[error("no strategy encoding for existential input '{0}'")]
    MissingStrategy(String),
    #[error("strategy for '{input}' depends on '{var}', which it may not observe")]
    StrategyScope { input: String, var: String },
    #[error("malformed solution at line {line}: {msg}")]
    MalformedSolution { line: usize, msg: String },
    #[error("no SDP solver found; set {} or the sdp_solver option", SOLVER_ENV)]
    SolverMissing,
    #[error("solver failed: {0}")]
    SolverFailed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver reported {0:?}; no certificate")]
    NotFeasible(SolverStatus),
}
