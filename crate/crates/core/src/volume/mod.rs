//! Deterministic volume estimation by lattice point counting over a
//! certified covering lattice, plus the applications built on epsilon-nets:
//! approximate Kovner-Besicovitch points, operator norms and polyhedral
//! approximation.

use nalgebra::DVector;

use crate::config::EngineConfig;
use crate::enumeration;
use crate::error::{Error, Result};
use crate::geometry::CenteredBody;
use crate::thinlattice::{thin_lattice_general, thin_lattice_symmetric, CoveringLattice, GlsProvider};

pub mod apps;
pub mod kb;

pub use apps::{operator_norm, polyhedral_approx};
pub use kb::{improve, improve_traced, kb_point, KBResult};

/// Count-based volume estimate with its guarantee interval
/// `vol(K) ∈ [V (1+eps)^{-n}, V]`.
#[derive(Debug, Clone)]
pub struct VolumeEstimate {
    pub value: f64,
    pub eps: f64,
    pub points_counted: u64,
    pub lattice_det: f64,
    pub guarantee: (f64, f64),
}

/// Estimate the volume of a convex body to within `(1+eps)^n`:
/// `V = (eps/2)^n det(Λ) |(eps/2)Λ ∩ ((1+eps/2)K - (eps/2)c)|` for a
/// certified `K[c]`-covering lattice. Symmetric bodies take the symmetric
/// pipeline directly with `c` the center.
pub fn estimate_volume(body: &CenteredBody, eps: f64, cfg: &EngineConfig) -> Result<VolumeEstimate> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("need 0 < eps <= 1, got {eps}"),
        });
    }
    let (covering, center) = thin_lattice_general(body, &GlsProvider, cfg)?;
    estimate_with_lattice(body, eps, &covering, &center, cfg)
}

/// The counting estimator on a caller-supplied certified covering lattice
/// for a symmetric `K0 ⊆ K - c`; reusable across `eps` values.
pub fn estimate_with_lattice(
    body: &CenteredBody,
    eps: f64,
    covering: &CoveringLattice,
    c: &DVector<f64>,
    cfg: &EngineConfig,
) -> Result<VolumeEstimate> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("need 0 < eps <= 1, got {eps}"),
        });
    }
    if !covering.is_certified_covering() {
        return Err(Error::CertificateMissing);
    }
    let half = eps / 2.0;
    let shifted = body.scale(1.0 + half).translate(&(c * -half));
    let lattice = covering.basis.scale(half);
    let count = enumeration::count(&shifted, &lattice, cfg)?;
    let n = body.dim as i32;
    let value = half.powi(n) * covering.basis.det_abs() * count as f64;
    Ok(VolumeEstimate {
        value,
        eps,
        points_counted: count,
        lattice_det: covering.basis.det_abs(),
        guarantee: (value / (1.0 + eps).powi(n), value),
    })
}

/// Symmetric fast path used inside the KB iteration: builds the covering
/// lattice for the (symmetric) body itself.
pub fn estimate_volume_symmetric(
    body: &CenteredBody,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<VolumeEstimate> {
    let covering = thin_lattice_symmetric(body, &GlsProvider, cfg)?;
    estimate_with_lattice(body, eps, &covering, &body.center, cfg)
}
