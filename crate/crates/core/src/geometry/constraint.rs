//! Exact convex constraints used by compiled bodies.
//!
//! A compiled body whose descriptor is built from polytopes, ellipsoids and
//! lp-balls is represented as an intersection of constraints of the three
//! kinds below. Each kind supports exact evaluation, a subgradient, a
//! closed-form (or bisection-free) ray gauge, and the affine transforms the
//! descriptor algebra needs.

use nalgebra::{DMatrix, DVector};

/// One convex constraint `g(x) <= 0` with nonempty interior at the origin of
/// the body it belongs to.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `a . x <= b`
    Linear { a: DVector<f64>, b: f64 },
    /// `(x - t)^T q (x - t) <= 1` with `q` symmetric positive definite.
    Quadratic { q: DMatrix<f64>, t: DVector<f64> },
    /// `|| d (x - t) ||_p <= 1`, `p >= 1` finite.
    PNorm { d: DMatrix<f64>, t: DVector<f64>, p: f64 },
}

impl Constraint {
    /// Constraint violation; nonpositive means satisfied.
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Constraint::Linear { a, b } => a.dot(x) - b,
            Constraint::Quadratic { q, t } => {
                let d = x - t;
                (q * &d).dot(&d) - 1.0
            }
            Constraint::PNorm { d, t, p } => {
                let y = d * (x - t);
                pnorm(&y, *p) - 1.0
            }
        }
    }

    /// A subgradient of the violation at `x`.
    pub fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Constraint::Linear { a, .. } => a.clone(),
            Constraint::Quadratic { q, t } => (q * (x - t)) * 2.0,
            Constraint::PNorm { d, t, p } => {
                let y = d * (x - t);
                d.transpose() * pnorm_subgradient(&y, *p)
            }
        }
    }

    /// Smallest `s >= 0` such that `x/s` satisfies the constraint, assuming
    /// the constraint holds strictly at 0. Used to evaluate gauges of
    /// constraint-form bodies exactly.
    pub fn ray_gauge(&self, x: &DVector<f64>) -> f64 {
        match self {
            Constraint::Linear { a, b } => {
                let num = a.dot(x);
                if num <= 0.0 {
                    0.0
                } else {
                    num / b
                }
            }
            Constraint::Quadratic { q, t } => {
                // Largest u with (u x - t)^T q (u x - t) <= 1; gauge = 1/u.
                let qx = q * x;
                let a2 = qx.dot(x);
                if a2 <= 0.0 {
                    return 0.0;
                }
                let b1 = qx.dot(t);
                let c0 = (q * t).dot(t) - 1.0;
                let disc = (b1 * b1 - a2 * c0).max(0.0);
                let u = (b1 + disc.sqrt()) / a2;
                if u <= 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / u
                }
            }
            Constraint::PNorm { d, t, p } => {
                let dx = d * x;
                if t.amax() == 0.0 {
                    return pnorm(&dx, *p);
                }
                // phi(u) = ||d (u x - t)||_p is convex with phi(0) < 1;
                // find the largest u with phi(u) <= 1 by bracketed bisection.
                let dt = d * t;
                let phi = |u: f64| pnorm(&(&dx * u - &dt), *p);
                if pnorm(&dx, *p) == 0.0 {
                    return 0.0;
                }
                let mut hi = 1.0;
                while phi(hi) <= 1.0 {
                    hi *= 2.0;
                    if hi > 1e18 {
                        return 0.0;
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if phi(mid) <= 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let u = 0.5 * (lo + hi);
                1.0 / u
            }
        }
    }

    /// Transform for the translated body `K + v`.
    pub fn translate(&self, v: &DVector<f64>) -> Constraint {
        match self {
            Constraint::Linear { a, b } => Constraint::Linear {
                a: a.clone(),
                b: b + a.dot(v),
            },
            Constraint::Quadratic { q, t } => Constraint::Quadratic {
                q: q.clone(),
                t: t + v,
            },
            Constraint::PNorm { d, t, p } => Constraint::PNorm {
                d: d.clone(),
                t: t + v,
                p: *p,
            },
        }
    }

    /// Transform for the scaled body `s K` (scaling about the origin), `s > 0`.
    pub fn scale(&self, s: f64) -> Constraint {
        match self {
            Constraint::Linear { a, b } => Constraint::Linear {
                a: a.clone(),
                b: b * s,
            },
            Constraint::Quadratic { q, t } => Constraint::Quadratic {
                q: q / (s * s),
                t: t * s,
            },
            Constraint::PNorm { d, t, p } => Constraint::PNorm {
                d: d / s,
                t: t * s,
                p: *p,
            },
        }
    }

    /// Transform for the image `M K` of a nonsingular matrix; `m_inv` is the
    /// inverse of `M`.
    pub fn affine_image(&self, m_inv: &DMatrix<f64>) -> Constraint {
        match self {
            Constraint::Linear { a, b } => Constraint::Linear {
                a: m_inv.transpose() * a,
                b: *b,
            },
            Constraint::Quadratic { q, t } => {
                let qi = m_inv.transpose() * q * m_inv;
                let m = inverse_of(m_inv);
                Constraint::Quadratic {
                    q: symmetrize(&qi),
                    t: &m * t,
                }
            }
            Constraint::PNorm { d, t, p } => {
                let m = inverse_of(m_inv);
                Constraint::PNorm {
                    d: d * m_inv,
                    t: &m * t,
                    p: *p,
                }
            }
        }
    }

    /// Transform for the reflected body `-K`.
    pub fn negate(&self) -> Constraint {
        match self {
            Constraint::Linear { a, b } => Constraint::Linear { a: -a, b: *b },
            Constraint::Quadratic { q, t } => Constraint::Quadratic {
                q: q.clone(),
                t: -t,
            },
            Constraint::PNorm { d, t, p } => Constraint::PNorm {
                d: -d,
                t: -t,
                p: *p,
            },
        }
    }
}

pub(crate) fn pnorm(y: &DVector<f64>, p: f64) -> f64 {
    if p.is_infinite() {
        y.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub(crate) fn pnorm_subgradient(y: &DVector<f64>, p: f64) -> DVector<f64> {
    let n = y.len();
    if p.is_infinite() {
        let mut best = 0usize;
        for i in 0..n {
            if y[i].abs() > y[best].abs() {
                best = i;
            }
        }
        let mut g = DVector::zeros(n);
        g[best] = y[best].signum();
        return g;
    }
    let norm = pnorm(y, p);
    if norm <= 1e-300 {
        return DVector::zeros(n);
    }
    DVector::from_fn(n, |i, _| {
        y[i].signum() * (y[i].abs() / norm).powf(p - 1.0)
    })
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn inverse_of(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone()
        .try_inverse()
        .expect("nonsingular by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ray_gauge_matches_halfplane() {
        let c = Constraint::Linear {
            a: DVector::from_vec(vec![1.0, 0.0]),
            b: 2.0,
        };
        let x = DVector::from_vec(vec![4.0, 1.0]);
        assert!((c.ray_gauge(&x) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_ray_gauge_unit_ball() {
        let c = Constraint::Quadratic {
            q: DMatrix::identity(2, 2),
            t: DVector::zeros(2),
        };
        let x = DVector::from_vec(vec![3.0, 4.0]);
        assert!((c.ray_gauge(&x) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_ball_ray_gauge() {
        // Ball of radius 1 centered at (0.5, 0): along +e1 the boundary is at
        // x = 1.5, so the gauge of (1.5, 0) is 1.
        let c = Constraint::Quadratic {
            q: DMatrix::identity(2, 2),
            t: DVector::from_vec(vec![0.5, 0.0]),
        };
        let x = DVector::from_vec(vec![1.5, 0.0]);
        assert!((c.ray_gauge(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pnorm_gauge_linf() {
        let c = Constraint::PNorm {
            d: DMatrix::identity(2, 2),
            t: DVector::zeros(2),
            p: f64::INFINITY,
        };
        let x = DVector::from_vec(vec![0.5, 0.25]);
        assert!((c.ray_gauge(&x) - 0.5).abs() < 1e-9);
    }
}
