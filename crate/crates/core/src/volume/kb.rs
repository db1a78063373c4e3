//! Approximate Kovner-Besicovitch points.
//!
//! The iteration covers the half-sum body `(A + x)/2` with a fine net in the
//! gauge of the current symmetrization `A[x]`, estimates the symmetrization
//! volume of every net point, and moves to the argmax. Concavity of the
//! normalized KB value drives geometric progress toward the optimum.

use nalgebra::DVector;
use std::ops::ControlFlow;

use crate::config::EngineConfig;
use crate::convexopt::rounding::gls_round;
use crate::enumeration;
use crate::error::{Error, Result};
use crate::geometry::{kb_body, CenteredBody};
use crate::thinlattice::{thin_lattice_symmetric, CoveringLattice, GlsProvider};
use crate::volume::estimate_with_lattice;

/// Result of the KB point computation. `nu` is only populated by callers
/// that have an independent volume reference.
#[derive(Debug, Clone)]
pub struct KBResult {
    pub c: DVector<f64>,
    pub nu: Option<f64>,
    pub eps: f64,
    pub iterations: u64,
}

/// Compute a `(1+eps)^{-n}`-approximate Kovner-Besicovitch point: a center
/// whose symmetrization volume is within that factor of the best possible.
///
/// The body is first rounded so that `B ⊆ K ⊆ (n+1) sqrt(n) B`, then the
/// improvement procedure runs along the ladder `K_i = 2^i B ∩ K` starting
/// from the ball center, and the result is mapped back through the rounding
/// transform.
pub fn kb_point(body: &CenteredBody, eps: f64, cfg: &EngineConfig) -> Result<KBResult> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("need eps > 0, got {eps}"),
        });
    }
    let eps = eps.min(0.5);
    let n = body.dim;
    let nf = n as f64;

    let rounding = gls_round(body, cfg)?;
    let white = rounding.whitening_map();
    let color = rounding.coloring_map();
    let mut tilde = body.translate(&(-&rounding.t)).affine_image(&white)?;
    // The rounding certifies the sandwich exactly.
    tilde.center = DVector::zeros(n);
    tilde.inner_radius = 1.0;
    tilde.outer_radius = rounding.sandwich_factor;

    // Ladder bodies 2^i D ∩ K for the box D = [-1/sqrt(n), 1/sqrt(n)]^n
    // inscribed in the certified unit ball: D ⊆ B ⊆ K after rounding,
    // each level is contained in twice the previous one, and 2^T D absorbs
    // K once 2^T >= n (n+1). Boxes keep polytopal inputs polytopal, which
    // the exact enumeration paths rely on.
    let levels = (nf * (nf + 1.0)).log2().ceil() as i32;
    let mut c = DVector::zeros(n);
    let mut iterations = 0u64;
    for i in 1..levels {
        let half_width = 2f64.powi(i) / nf.sqrt();
        let cube = cube_body(n, half_width);
        let mut ki = cube.intersect(&tilde)?;
        ki.center = DVector::zeros(n);
        ki.inner_radius = half_width.min(1.0);
        ki.outer_radius = ki.outer_radius.min(half_width * nf.sqrt());
        let (next, trace) = improve_traced(&ki, &c, 1.0 / 6.0, 0.5, cfg)?;
        iterations += trace.len() as u64;
        c = next;
    }
    let (fin, trace) = improve_traced(&tilde, &c, 1.0 / 6.0, eps, cfg)?;
    iterations += trace.len() as u64;

    Ok(KBResult {
        c: &color * fin + &rounding.t,
        nu: None,
        eps,
        iterations,
    })
}

/// One run of the improvement procedure; returns the final center.
pub fn improve(
    a_body: &CenteredBody,
    x: &DVector<f64>,
    alpha: f64,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<DVector<f64>> {
    Ok(improve_traced(a_body, x, alpha, eps, cfg)?.0)
}

/// Improvement procedure with the per-round best estimated volumes.
///
/// Round structure: cover `(A + x)/2` by `(eps0/2) A[x]` using one thin
/// lattice built for `A[x]`; estimate `vol(A[y])` for every net point to
/// within `(1 + eps0/(1-eps0))^n`, reusing the round's lattice through the
/// containment `A[y] ⊇ (1 - |y-x|_{A[x]}) A[x]`; move to the argmax (first
/// maximum in stream order). A round that reproduces its own center is a
/// fixed point and short-circuits the remaining rounds.
pub fn improve_traced(
    a_body: &CenteredBody,
    x: &DVector<f64>,
    alpha: f64,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<(DVector<f64>, Vec<f64>)> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("need 0 < eps <= 1/2, got {eps}"),
        });
    }
    let eps0 = eps / (6.0 + 3.0 * eps);
    let budget_rounds = ((1.0 / alpha).ln() / (1.0 / (1.0 - eps0)).ln()).floor() as u64;
    // The per-round progress bound is
    //   nu_j >= (nu_{j-1} + gamma) (1 - eps0)^2 / 2,
    // a contraction with factor theta = (1-eps0)^2/2 toward the fixed point
    // gamma (1-eps0)^2 / (2 - (1-eps0)^2), which exceeds the target
    // gamma (1-3 eps0)/(1+3 eps0). Solving the recursion exactly (instead of
    // loosening it to a 1/(1-eps0) growth factor) bounds the rounds needed
    // to cross the target; the bound is worst at gamma = 1.
    let theta = (1.0 - eps0) * (1.0 - eps0) / 2.0;
    let c_star = (1.0 - eps0) * (1.0 - eps0) / (2.0 - (1.0 - eps0) * (1.0 - eps0));
    let t_star = (1.0 - 3.0 * eps0) / (1.0 + 3.0 * eps0);
    let tight_rounds = if c_star > alpha && c_star > t_star {
        (((c_star - alpha) / (c_star - t_star)).ln() / (1.0 / theta).ln())
            .ceil()
            .max(1.0) as u64
    } else {
        1
    };
    let rounds = budget_rounds.min(tight_rounds).max(1);
    let eps_vol = eps0 / (1.0 - eps0);

    let mut x = clamp_inside(a_body, x, cfg)?;
    let mut trace = Vec::new();
    // Each round is a deterministic map of the current center, so the orbit
    // is eventually periodic; once a repeat is seen, the final center after
    // all remaining rounds follows from the cycle length.
    let mut history: Vec<DVector<f64>> = vec![x.clone()];
    for round in 0..rounds {
        let next = improve_round(a_body, &x, eps0, eps_vol, cfg, &mut trace)?;
        if let Some(pos) = history.iter().position(|h| h == &next) {
            let cycle = history.len() - pos;
            let remaining = (rounds - round - 1) as usize;
            x = history[pos + remaining % cycle].clone();
            break;
        }
        history.push(next.clone());
        x = next;
    }
    Ok((x, trace))
}

/// One improvement round: net over the half-sum body, estimate every net
/// value, return the argmax (ties to the earliest stream index).
fn improve_round(
    a_body: &CenteredBody,
    x: &DVector<f64>,
    eps0: f64,
    eps_vol: f64,
    cfg: &EngineConfig,
    trace: &mut Vec<f64>,
) -> Result<DVector<f64>> {
    let kx = kb_body(a_body, x, cfg)?;
    let lat_x = thin_lattice_symmetric(&kx, &GlsProvider, cfg)?.normalized_to_certificate();

    // Net over (A + x)/2 by (eps0/2) A[x].
    let half_body = a_body.translate(x).scale(0.5);
    let cover_body = kx.scale(eps0 / 2.0);
    let lat_cov = lat_x.scaled_with_body(eps0 / 2.0);
    let difference = half_body.minkowski_sum(&cover_body.negate());
    if !lat_cov.is_certified_covering() {
        return Err(Error::CertificateMissing);
    }
    let mut net = Vec::new();
    let mut sink = |_: &[i64], p: &DVector<f64>| {
        net.push(p.clone());
        ControlFlow::Continue(())
    };
    enumeration::enumerate(&difference, &lat_cov.basis, cfg, &mut sink)?;

    let values = evaluate_net(a_body, &lat_x, &net, eps_vol, cfg)?;
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in values.iter().enumerate() {
        let v = match v {
            Ok(val) => *val,
            Err(msg) => return Err(Error::ProviderFailure(msg.clone())),
        };
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, i));
        }
    }
    let Some((best_value, best_idx)) = best else {
        trace.push(0.0);
        return Ok(x.clone());
    };
    trace.push(best_value);
    clamp_inside(a_body, &net[best_idx], cfg)
}

/// Estimated symmetrization volumes of the net points; parallel when the
/// config allows, with values independent of the thread count.
fn evaluate_net(
    a_body: &CenteredBody,
    lat_x: &CoveringLattice,
    net: &[DVector<f64>],
    eps_vol: f64,
    cfg: &EngineConfig,
) -> Result<Vec<std::result::Result<f64, String>>> {
    let eval = |y: &DVector<f64>| -> std::result::Result<f64, String> {
        evaluate_candidate(a_body, lat_x, y, eps_vol, cfg).map_err(|e| e.to_string())
    };
    if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::ProviderFailure(e.to_string()))?;
        use rayon::prelude::*;
        Ok(pool.install(|| net.par_iter().map(eval).collect()))
    } else {
        Ok(net.iter().map(eval).collect())
    }
}

/// Volume of `A[y]` estimated on the round's cached lattice: the lattice is
/// re-certified against the candidate's symmetrization with a coarse
/// covering-radius bracket and normalized, which keeps the estimator sound
/// at any candidate while avoiding a fresh pipeline per point.
fn evaluate_candidate(
    a_body: &CenteredBody,
    lat_x: &CoveringLattice,
    y: &DVector<f64>,
    eps_vol: f64,
    cfg: &EngineConfig,
) -> Result<f64> {
    let y_cl = clamp_inside(a_body, y, cfg)?;
    let ky = kb_body(a_body, &y_cl, cfg)?;
    let mu = enumeration::covering_radius_bracket_with_tol(&ky, &lat_x.basis, 3, 0.02, cfg)?;
    if !(mu.1 > 0.0 && mu.1.is_finite()) {
        return Err(Error::CertificateMissing);
    }
    let mut lat_y = lat_x.clone();
    lat_y.mu_bracket = mu;
    let lat_y = lat_y.normalized_to_certificate();
    let est = estimate_with_lattice(&ky, eps_vol, &lat_y, &DVector::zeros(ky.dim), cfg)?;
    Ok(est.value)
}

/// Axis-aligned cube `[-h, h]^n` as a constraint body.
fn cube_body(n: usize, h: f64) -> CenteredBody {
    let mut cons = Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        cons.push(crate::geometry::Constraint::Linear { a: e.clone(), b: h });
        cons.push(crate::geometry::Constraint::Linear { a: -e, b: h });
    }
    CenteredBody::from_constraints(cons, DVector::zeros(n), h, h * (n as f64).sqrt(), true)
}

/// Pull a point just inside the body along the ray from the center;
/// deterministic and a no-op for interior points.
fn clamp_inside(body: &CenteredBody, x: &DVector<f64>, cfg: &EngineConfig) -> Result<DVector<f64>> {
    let g = body.gauge(x, cfg)?;
    if g <= 1.0 - 1e-9 {
        return Ok(x.clone());
    }
    let v = x - &body.center;
    Ok(&body.center + v * ((1.0 - 1e-9) / g))
}
