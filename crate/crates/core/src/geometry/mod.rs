//! Convex bodies as weak membership oracles with sandwiching metadata.

pub mod body;
pub mod constraint;
pub mod descriptor;

pub use body::{kb_body, BodyShape, CenteredBody, MembershipFn};
pub use constraint::Constraint;
pub use descriptor::{compile, BodyDescriptor, PExponent};

use crate::config::EngineConfig;
use crate::error::Result;
use nalgebra::DVector;

/// Gauge of a body centered so its interior point is its own `center` field:
/// `inf { s >= 0 : x ∈ s K }` evaluated about that center.
///
/// Thin wrapper over [`CenteredBody::gauge`] kept as a free function because
/// several callers treat the gauge as a standalone oracle.
pub fn gauge(body: &CenteredBody, x: &DVector<f64>, cfg: &EngineConfig) -> Result<f64> {
    body.gauge(x, cfg)
}
