//! Weak optimization over membership oracles: the cutting-plane engine,
//! ellipsoidal rounding, fiber feasibility and the small LP solver that
//! backs polytope plumbing.

pub mod engine;
pub mod fiber;
pub mod rounding;
pub mod simplex;

pub use engine::{separate, weak_minimize, weak_minimize_fn, LinearObjective, Objective};
pub use fiber::{fiber_distance, fiber_feasible, Fiber};
pub use rounding::{gls_round, RoundingResult};
