//! Deterministic thin lattice coverings and epsilon-nets for convex bodies
//! given by membership oracles, with the derived estimators: point counting
//! volume estimation, approximate Kovner-Besicovitch points, operator norms
//! and polyhedral approximation.
//!
//! The construction pipeline is: ellipsoidal rounding of the body, an
//! M-lattice aligned with the ellipsoid axes, a derandomized sparsifying
//! sublattice that removes all nonzero lattice points from the body, greedy
//! index-3 densification until the covering radius is certified, and a final
//! rescale. All enumeration happens through Schnorr-Euchner search with
//! per-node convex fiber feasibility, so memory stays independent of the
//! number of points reported.

pub mod config;
pub mod convexopt;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod enumeration;
pub mod refcheck;
pub mod thinlattice;
pub mod volume;

pub use config::{unit_ball_volume, EngineConfig};
pub use error::{Error, Result};
