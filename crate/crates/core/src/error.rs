//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by body compilation, optimization, lattice algebra,
/// enumeration and the covering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("body is not centered: inner radius {0} is not positive")]
    NonCenteredBody(f64),
    #[error("bisection budget exhausted before reaching tolerance {0}")]
    ToleranceTooSmall(f64),
    #[error("symmetrization center lies outside the body (gauge {0})")]
    CenterOutsideBody(f64),
    #[error("polytope is unbounded in direction {0}")]
    UnboundedBody(usize),
    #[error("body has empty interior (certified inner radius {0})")]
    EmptyInterior(f64),
    #[error("bad body descriptor: {0}")]
    BadDescriptor(String),
    #[error("iteration budget {0} exceeded")]
    IterationBudgetExceeded(u64),
    #[error("basis is not commensurable with the reference lattice (residual {0})")]
    NotCommensurable(f64),
    #[error("adjoined point does not have order three: 3c is not a lattice vector")]
    NotOrderThree,
    #[error("adjoined point is already a lattice vector")]
    AlreadyMember,
    #[error("singular basis: Gram-Schmidt norm {0} too small")]
    SingularBasis(f64),
    #[error("fiber solve failed at level {level}, coefficient {coefficient}")]
    FiberSolveFailure { level: usize, coefficient: i64 },
    #[error("enumeration node budget {0} exceeded")]
    BudgetExceeded(u64),
    #[error("no nonzero lattice point inside the search radius {0}")]
    NoNonzeroPoint(f64),
    #[error("no prime found: lattice point count {0} below two, volume precondition violated")]
    NoPrimeFound(u64),
    #[error("sparsifier greedy stuck at coordinate {0}: candidate set corrupted")]
    GreedyStuck(usize),
    #[error("densification exceeded {0} adjoin steps; packing precondition violated")]
    IterationOverflow(u64),
    #[error("covering lattice lacks a covering-radius certificate")]
    CertificateMissing,
    #[error("grid step {0} too coarse to resolve the covering body")]
    GridTooCoarse(f64),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("ellipsoid provider failed: {0}")]
    ProviderFailure(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
