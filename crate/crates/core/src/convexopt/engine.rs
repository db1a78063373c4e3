//! Central-cut ellipsoid engine for weak optimization over membership
//! oracles. Separation for points outside the body comes from constraint
//! subgradients when the body has exact form, and from the ray-to-boundary
//! gauge construction otherwise.

use nalgebra::{DMatrix, DVector};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::{BodyShape, CenteredBody};

/// Convex objective with subgradients.
pub trait Objective {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn subgradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// Linear objective `c . x`.
pub struct LinearObjective(pub DVector<f64>);

impl Objective for LinearObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0.dot(x)
    }
    fn subgradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.0.clone()
    }
}

/// Black-box objective differentiated by forward differences; `lipschitz`
/// scales the step.
pub struct OracleObjective<'a> {
    pub f: &'a dyn Fn(&DVector<f64>) -> f64,
    pub lipschitz: f64,
}

impl Objective for OracleObjective<'_> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }
    fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = x.len();
        let h = 1e-7 * (1.0 + x.norm()) / self.lipschitz.max(1.0);
        let f0 = (self.f)(x);
        let mut g = DVector::zeros(n);
        let mut xp = x.clone();
        for i in 0..n {
            xp[i] += h;
            g[i] = ((self.f)(&xp) - f0) / h;
            xp[i] = x[i];
        }
        g
    }
}

/// Separating direction for `x` outside the body: a vector `g` with
/// `K ⊆ { y : g . (y - x) <= 0 }`. Returns `None` when `x` is (weakly)
/// inside.
pub fn separate(body: &CenteredBody, x: &DVector<f64>, cfg: &EngineConfig) -> Option<DVector<f64>> {
    match body.shape() {
        BodyShape::Constraints(cons) => {
            let mut worst = 0.0;
            let mut arg = None;
            for c in cons {
                let v = c.eval(x);
                if v > worst {
                    worst = v;
                    arg = Some(c);
                }
            }
            arg.map(|c| c.subgradient(x))
        }
        _ => {
            if body.contains_with(x, cfg.oracle_delta, cfg) {
                return None;
            }
            gauge_subgradient(body, x, cfg)
        }
    }
}

/// Finite-difference subgradient of the gauge at `x - center`; valid as a
/// separator whenever the gauge exceeds one.
fn gauge_subgradient(
    body: &CenteredBody,
    x: &DVector<f64>,
    cfg: &EngineConfig,
) -> Option<DVector<f64>> {
    let n = body.dim;
    let g0 = body.gauge(x, cfg).ok()?;
    if g0 <= 1.0 {
        return None;
    }
    let h = 1e-6 * (x - &body.center).norm().max(1e-6);
    let mut g = DVector::zeros(n);
    let mut xp = x.clone();
    for i in 0..n {
        xp[i] += h;
        let gi = body.gauge(&xp, cfg).ok()?;
        g[i] = (gi - g0) / h;
        xp[i] = x[i];
    }
    if g.norm() <= 1e-12 {
        None
    } else {
        Some(g)
    }
}

/// Weak minimization of a convex objective over a centered body:
/// returns `(y, omega)` with `y ∈ K` (at tolerance) and
/// `omega - eps <= min_K f <= f(y) = omega`.
pub fn weak_minimize(
    body: &CenteredBody,
    objective: &dyn Objective,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<(DVector<f64>, f64)> {
    if body.inner_radius <= 0.0 {
        return Err(Error::NonCenteredBody(body.inner_radius));
    }
    let n = body.dim;
    if n == 1 {
        return minimize_interval(body, objective, eps, cfg);
    }

    let budget = cfg.ellipsoid_budget(n, body.inner_radius, body.outer_radius, eps);
    let mut center = body.center.clone();
    let mut p = DMatrix::<f64>::identity(n, n) * (body.outer_radius * body.outer_radius);
    let mut best: Option<(DVector<f64>, f64)> = None;

    for _ in 0..budget {
        let g = if body.contains_with(&center, cfg.oracle_delta, cfg) {
            let f = objective.value(&center);
            if best.as_ref().is_none_or(|(_, fb)| f < *fb) {
                best = Some((center.clone(), f));
            }
            let g = objective.subgradient(&center);
            if g.norm() <= 1e-14 {
                break;
            }
            g
        } else {
            match separate(body, &center, cfg) {
                Some(g) => g,
                None => {
                    // Weak oracle disagreement near the boundary; treat as
                    // feasible.
                    let f = objective.value(&center);
                    if best.as_ref().is_none_or(|(_, fb)| f < *fb) {
                        best = Some((center.clone(), f));
                    }
                    objective.subgradient(&center)
                }
            }
        };
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if gpg <= 1e-300 {
            break;
        }
        let step = &pg / gpg.sqrt();
        let nf = n as f64;
        center -= &step * (1.0 / (nf + 1.0));
        p = (&p - (&pg * pg.transpose()) * (2.0 / ((nf + 1.0) * gpg)))
            * (nf * nf / (nf * nf - 1.0));
        p = (&p + p.transpose()) * 0.5;
    }

    let (y, f) = best.ok_or(Error::IterationBudgetExceeded(budget))?;
    Ok((y, f))
}

/// Convenience wrapper for black-box objectives per the classical statement.
pub fn weak_minimize_fn(
    body: &CenteredBody,
    f: &dyn Fn(&DVector<f64>) -> f64,
    lipschitz: f64,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<(DVector<f64>, f64)> {
    weak_minimize(body, &OracleObjective { f, lipschitz }, eps, cfg)
}

/// One-dimensional bodies are intervals; golden-section over the interval.
fn minimize_interval(
    body: &CenteredBody,
    objective: &dyn Objective,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<(DVector<f64>, f64)> {
    let e = DVector::from_vec(vec![1.0]);
    let gp = body.gauge(&(&body.center + &e), cfg)?;
    let gm = body.gauge(&(&body.center - &e), cfg)?;
    let mut lo = body.center[0] - 1.0 / gm.max(1e-12);
    let mut hi = body.center[0] + 1.0 / gp.max(1e-12);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let val = |t: f64| objective.value(&DVector::from_vec(vec![t]));
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (val(a), val(b));
    for _ in 0..200 {
        if hi - lo < eps.max(1e-14) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = val(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = val(b);
        }
    }
    let t = if fa <= fb { a } else { b };
    Ok((DVector::from_vec(vec![t]), fa.min(fb)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::descriptor::{compile, BodyDescriptor, PExponent};

    #[test]
    fn linear_over_unit_ball() {
        let cfg = EngineConfig::default();
        let ball = CenteredBody::ball(3, 1.0);
        let obj = LinearObjective(DVector::from_vec(vec![1.0, 0.0, 0.0]));
        let (y, omega) = weak_minimize(&ball, &obj, 1e-4, &cfg).unwrap();
        assert!(omega <= -1.0 + 1e-3, "omega={omega}");
        assert!((y[0] + 1.0).abs() < 1e-2);
    }

    #[test]
    fn distance_to_shifted_point_over_box() {
        // min ||x - (3,0)|| over [-1,1]^2 is 2 at (1,0).
        let cfg = EngineConfig::default();
        let d = BodyDescriptor::Lpball {
            p: PExponent(f64::INFINITY),
            radius: 1.0,
            dim: 2,
        };
        let body = compile(&d, &cfg).unwrap();
        let target = DVector::from_vec(vec![3.0, 0.0]);
        let f = move |x: &DVector<f64>| (x - &target).norm();
        let (y, omega) = weak_minimize_fn(&body, &f, 1.0, 1e-5, &cfg).unwrap();
        assert!((omega - 2.0).abs() < 1e-3, "omega={omega}");
        assert!((y[0] - 1.0).abs() < 1e-2);
    }
}
