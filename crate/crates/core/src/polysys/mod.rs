//! Polynomials, semialgebraic sets and polynomial dynamical systems.

mod parse;
mod poly;
mod region;
mod system;

use thiserror::Error;

pub use parse::{parse_polynomial, parse_unchecked};
pub use poly::{CompiledPoly, Monomial, Polynomial};
pub use region::{
    negate_inequality, region_overlap_witness, BasicSet, BoxSampler, CompiledSet, IntervalBox,
    SemialgebraicRegion, MEMBERSHIP_SLACK,
};
pub use system::{copy_var, self_compose, split_copy_var, AugmentedSystem, DynamicalSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("no value for variable '{0}'")]
    MissingVariable(String),
    #[error("gap must be positive, got {0}")]
    NonpositiveGap(f64),
    #[error("variable '{0}' has no finite bounds; declare explicit bounds")]
    Unbounded(String),
    #[error("expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a region needs at least one clause")]
    EmptyRegion,
    #[error("self-composition needs at least one copy")]
    ZeroCopies,
}
