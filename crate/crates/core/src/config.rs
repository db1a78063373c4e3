//! Engine configuration: tolerances and iteration budgets.
//!
//! Every oracle interaction carries an explicit tolerance; derived oracles sum
//! the tolerances of their inputs. All defaults here are plain constants so
//! that identical inputs always produce identical outputs.

/// Budgets and tolerances shared by the optimization engine, enumeration and
/// the covering pipeline.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Weak-membership tolerance passed to oracles.
    pub oracle_delta: f64,
    /// Absolute tolerance for gauge bisection.
    pub gauge_tol: f64,
    /// Maximum bisection iterations for gauge evaluation.
    pub gauge_budget: u32,
    /// Euclidean slack below which a fiber is declared to intersect the body.
    /// This is the enumeration tolerance band.
    pub feas_tol: f64,
    /// Extra iterations added to the classical ellipsoid-method bound.
    pub ellipsoid_slack: u64,
    /// Hard cap on ellipsoid-method iterations.
    pub ellipsoid_cap: u64,
    /// Node budget for a single enumeration call.
    pub node_budget: u64,
    /// Relative tolerance for the per-coset distance bisection used by
    /// covering-radius bracketing.
    pub bracket_rel_tol: f64,
    /// Soft limit on the number of cosets scanned by covering-radius
    /// bracketing before a cost warning is logged.
    pub coset_budget: u64,
    /// Relative margin required to adjoin a coset during densification.
    pub densify_margin: f64,
    /// Tolerance for integrality tests in lattice algebra.
    pub integrality_tol: f64,
    /// The absolute constant scaling the M-lattice; budget formulas take it
    /// symbolically.
    pub c0: f64,
    /// Worker threads for net-point evaluation (1 = sequential).
    pub threads: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            oracle_delta: 1e-9,
            gauge_tol: 1e-9,
            gauge_budget: 128,
            feas_tol: 1e-7,
            ellipsoid_slack: 64,
            ellipsoid_cap: 200_000,
            node_budget: 100_000_000,
            bracket_rel_tol: 1e-7,
            coset_budget: 100_000,
            densify_margin: 1e-6,
            integrality_tol: 1e-9,
            c0: 4.0,
            threads: 1,
        }
    }
}

impl EngineConfig {
    /// Iteration budget for one weak-optimization run over a body sandwiched
    /// between radii `r` and `cap_r`, solved to accuracy `eps`.
    pub fn ellipsoid_budget(&self, n: usize, r: f64, cap_r: f64, eps: f64) -> u64 {
        let ratio = (cap_r / (r * eps.max(1e-12))).max(2.0);
        let classical = (2.0 * (n as f64) * (n as f64) * ratio.ln()).ceil() as u64;
        (classical + self.ellipsoid_slack).min(self.ellipsoid_cap)
    }
}

/// Volume of the unit Euclidean ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = pi^(n/2) / Gamma(n/2 + 1), evaluated via the half-integer
    // recurrence to avoid a gamma dependency.
    let mut v = 1.0; // V_0
    let mut prev = 2.0; // V_1
    if n == 0 {
        return v;
    }
    if n == 1 {
        return prev;
    }
    for k in 2..=n {
        let next = 2.0 * std::f64::consts::PI / (k as f64) * v;
        v = prev;
        prev = next;
    }
    prev
}
