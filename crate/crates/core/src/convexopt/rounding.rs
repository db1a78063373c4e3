//! Ellipsoidal rounding with the classical sandwich factor
//! `n^(1/2) (n+1)` via the shallow-cut ellipsoid iteration.

use nalgebra::{DMatrix, DVector};

use super::engine::separate;
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::CenteredBody;

/// Rounding certificate: `E(A) + t ⊆ K ⊆ sandwich_factor · E(A) + t`
/// where `E(A) = { x : x^T A x <= 1 }`.
#[derive(Debug, Clone)]
pub struct RoundingResult {
    pub a: DMatrix<f64>,
    pub t: DVector<f64>,
    pub sandwich_factor: f64,
}

impl RoundingResult {
    /// Linear map sending `E(A)` to the unit ball (`A^(1/2)`).
    pub fn whitening_map(&self) -> DMatrix<f64> {
        spd_power(&self.a, 0.5)
    }

    /// Inverse of [`Self::whitening_map`] (`A^(-1/2)`).
    pub fn coloring_map(&self) -> DMatrix<f64> {
        spd_power(&self.a, -0.5)
    }

    /// Volume of `E(A)`.
    pub fn ellipsoid_volume(&self) -> f64 {
        let det = self.a.determinant();
        crate::config::unit_ball_volume(self.t.len()) / det.sqrt()
    }
}

pub(crate) fn spd_power(a: &DMatrix<f64>, power: f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let col = eig.eigenvectors.column(k);
        let lam = eig.eigenvalues[k].max(1e-300).powf(power);
        out += (col * col.transpose()) * lam;
    }
    out
}

/// Deterministic rounding of a centered body. Maintains an outer ellipsoid
/// containing `K` and shrinks it with shallow cuts until the `2n` shrunken
/// axis poles all lie in `K`; the inscribed cross-polytope then certifies the
/// inner ellipsoid.
pub fn gls_round(body: &CenteredBody, cfg: &EngineConfig) -> Result<RoundingResult> {
    if body.inner_radius <= 0.0 {
        return Err(Error::NonCenteredBody(body.inner_radius));
    }
    let n = body.dim;
    let nf = n as f64;
    let factor = nf.sqrt() * (nf + 1.0);
    if n == 1 {
        // Interval: the inner "ellipsoid" is found directly from the gauge.
        let e = DVector::from_vec(vec![1.0]);
        let gp = body.gauge(&(&body.center + &e), cfg)?;
        let gm = body.gauge(&(&body.center - &e), cfg)?;
        let h = (1.0 / gp.max(1e-12)).min(1.0 / gm.max(1e-12));
        return Ok(RoundingResult {
            a: DMatrix::from_vec(1, 1, vec![1.0 / (h * h)]),
            t: body.center.clone(),
            sandwich_factor: factor,
        });
    }

    let mut t = body.center.clone();
    let mut p = DMatrix::<f64>::identity(n, n) * (body.outer_radius * body.outer_radius);
    let cap = (8.0 * nf * nf * (body.outer_radius / body.inner_radius).max(2.0).ln()).ceil()
        as u64
        + 256;

    let mut iterations = 0u64;
    'outer: loop {
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationBudgetExceeded(cap));
        }
        let eig = p.clone().symmetric_eigen();
        for k in 0..n {
            let axis = eig.eigenvectors.column(k) * eig.eigenvalues[k].max(0.0).sqrt();
            for sign in [1.0f64, -1.0] {
                let pole = &t + &axis * (sign / (nf + 1.0));
                if body.contains_with(&pole, cfg.oracle_delta, cfg) {
                    continue;
                }
                let Some(g) = separate(body, &pole, cfg) else {
                    continue;
                };
                // Shallow cut through the failing pole.
                let pg = &p * &g;
                let gpg = g.dot(&pg);
                if gpg <= 1e-300 {
                    break 'outer;
                }
                let sqrt_gpg = gpg.sqrt();
                let alpha = (-g.dot(&(&pole - &t)) / sqrt_gpg).clamp(-1.0 / (nf + 1.0), 0.99);
                let tau = (1.0 + nf * alpha) / (nf + 1.0);
                let delta = nf * nf * (1.0 - alpha * alpha) / (nf * nf - 1.0);
                let sigma = 2.0 * (1.0 + nf * alpha) / ((nf + 1.0) * (1.0 + alpha));
                t -= (&pg / sqrt_gpg) * tau;
                p = (&p - (&pg * pg.transpose()) * (sigma / gpg)) * delta;
                p = (&p + p.transpose()) * 0.5;
                continue 'outer;
            }
        }
        break;
    }

    // All shrunken poles are inside K: the inner ellipsoid is the outer one
    // scaled by 1/((n+1) sqrt(n)).
    let scale = (nf + 1.0) * nf.sqrt();
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or(Error::ProviderFailure("outer ellipsoid collapsed".into()))?;
    let a = (&p_inv + p_inv.transpose()) * 0.5 * (scale * scale);
    let t_out = if body.symmetric { body.center.clone() } else { t };
    Ok(RoundingResult {
        a,
        t: t_out,
        sandwich_factor: factor,
    })
}
