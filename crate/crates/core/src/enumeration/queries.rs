//! Queries derived from enumeration: shortest nonzero vector, gauge-ball
//! emptiness, and covering-radius bracketing over `Λ/p mod Λ` cosets.

use std::ops::ControlFlow;

use nalgebra::DVector;

use super::enumerate;
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::CenteredBody;
use crate::lattice::{mod_p_cosets, LatticeBasis};

/// Minimum distance `λ1(K, Λ)`: gauge of the shortest nonzero lattice
/// vector, found by enumerating `sK ∩ Λ`. The caller guarantees
/// `λ1 <= s`; when no nonzero point lies in the search radius the caller's
/// bound was wrong and `NoNonzeroPoint` is returned.
pub fn lambda1(
    body: &CenteredBody,
    basis: &LatticeBasis,
    search_radius: f64,
    cfg: &EngineConfig,
) -> Result<(f64, DVector<f64>)> {
    let scaled = body.scale(search_radius);
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut err: Option<crate::error::Error> = None;
    let mut sink = |c: &[i64], p: &DVector<f64>| {
        if c.iter().all(|&v| v == 0) {
            return ControlFlow::Continue(());
        }
        match body.gauge(p, cfg) {
            Ok(g) => {
                if best.as_ref().is_none_or(|(b, _)| g < *b - 1e-12) {
                    best = Some((g, p.clone()));
                }
                ControlFlow::Continue(())
            }
            Err(e) => {
                err = Some(e);
                ControlFlow::Break(())
            }
        }
    };
    enumerate(&scaled, basis, cfg, &mut sink)?;
    if let Some(e) = err {
        return Err(e);
    }
    best.ok_or(Error::NoNonzeroPoint(search_radius))
}

/// True iff `Λ ∩ (x + λ K) = ∅`, i.e. the gauge distance from `x` to the
/// lattice exceeds `λ`. Ties inside the tolerance band resolve to "not far",
/// which keeps densification conservative.
pub fn is_far(
    body: &CenteredBody,
    basis: &LatticeBasis,
    x: &DVector<f64>,
    lambda: f64,
    cfg: &EngineConfig,
) -> Result<bool> {
    let ball = body.scale(lambda).translate(x);
    let mut found = false;
    let mut sink = |_: &[i64], _: &DVector<f64>| {
        found = true;
        ControlFlow::Break(())
    };
    enumerate(&ball, basis, cfg, &mut sink)?;
    Ok(!found)
}

/// Gauge distance `d_K(Λ, x)` bisected over `is_far`; returns the certified
/// upper end of the final bracket.
pub fn lattice_distance(
    body: &CenteredBody,
    basis: &LatticeBasis,
    x: &DVector<f64>,
    cfg: &EngineConfig,
) -> Result<f64> {
    lattice_distance_with_tol(body, basis, x, cfg.bracket_rel_tol, cfg)
}

fn lattice_distance_with_tol(
    body: &CenteredBody,
    basis: &LatticeBasis,
    x: &DVector<f64>,
    rel_tol: f64,
    cfg: &EngineConfig,
) -> Result<f64> {
    let mut hi = body.gauge(x, cfg)?;
    if hi <= 0.0 {
        return Ok(0.0);
    }
    if is_far(body, basis, x, hi, cfg)? {
        // Defensive widening for weak oracles; the zero vector should be
        // within gauge hi of x already.
        let mut guard = 0;
        let mut outer = hi * 2.0;
        while is_far(body, basis, x, outer, cfg)? {
            outer *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::NoNonzeroPoint(outer));
            }
        }
        hi = outer;
    }
    let mut lo = 0.0f64;
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if is_far(body, basis, x, mid, cfg)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Covering-radius bracket from the `Λ/p mod Λ` coset maximum:
/// `(m, m p/(p-1))` where `m = max_c d_K(Λ, c)`; the true covering radius
/// lies inside the bracket.
pub fn covering_radius_bracket(
    body: &CenteredBody,
    basis: &LatticeBasis,
    p: u64,
    cfg: &EngineConfig,
) -> Result<(f64, f64)> {
    covering_radius_bracket_with_tol(body, basis, p, cfg.bracket_rel_tol, cfg)
}

/// Bracket with an explicit per-coset bisection tolerance; looser
/// tolerances keep the upper end certified and only widen the bracket.
pub fn covering_radius_bracket_with_tol(
    body: &CenteredBody,
    basis: &LatticeBasis,
    p: u64,
    rel_tol: f64,
    cfg: &EngineConfig,
) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("need p >= 2, got {p}"),
        });
    }
    let n = basis.dim();
    let total = (p as f64).powi(n as i32);
    if total > cfg.coset_budget as f64 {
        log::warn!(
            "covering-radius bracket scans {total} cosets, above the budget {}",
            cfg.coset_budget
        );
    }
    let mut m = 0.0f64;
    for (digits, rep) in mod_p_cosets(basis, p) {
        if digits.iter().all(|&d| d == 0) {
            continue;
        }
        let d = lattice_distance_with_tol(body, basis, &rep, rel_tol, cfg)?;
        m = m.max(d);
    }
    Ok((m, m * p as f64 / (p as f64 - 1.0)))
}
