//! Applications of epsilon-nets: operator norm estimation and polyhedral
//! approximation of symmetric bodies.

use nalgebra::{DMatrix, DVector};
use std::ops::ControlFlow;

use crate::config::EngineConfig;
use crate::enumeration;
use crate::error::{Error, Result};
use crate::geometry::{BodyDescriptor, BodyShape, CenteredBody, Constraint};
use crate::thinlattice::{thin_lattice_symmetric, GlsProvider};

/// Estimate the operator norm of `T : (R^n, ||.||_X) -> (R^m, ||.||_Y)`
/// with `(1 - eps/2) ||T|| <= V <= ||T||`.
///
/// A net of the unit ball `B_X` is generated from a thin covering lattice;
/// net points are normalized onto the ball before evaluation so the maximum
/// never overshoots, and the net is built at a quarter of `eps` so the
/// normalization cost stays within the stated bracket.
pub fn operator_norm(
    t: &DMatrix<f64>,
    bx: &CenteredBody,
    by_gauge: &dyn Fn(&DVector<f64>) -> f64,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("need 0 < eps <= 1/2, got {eps}"),
        });
    }
    if !bx.symmetric || bx.center.amax() != 0.0 {
        return Err(Error::InvalidParameter {
            name: "bx",
            reason: "domain ball must be symmetric about the origin".into(),
        });
    }
    if t.ncols() != bx.dim {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("expected {} columns, found {}", bx.dim, t.ncols()),
        });
    }
    let sigma = eps / 4.0;
    let covering = thin_lattice_symmetric(bx, &GlsProvider, cfg)?;
    let cover_body = bx.scale(sigma);
    let lat = covering.scaled_with_body(sigma);
    let difference = bx.minkowski_sum(&cover_body.negate());
    let mut best = 0.0f64;
    let mut gauge_err = None;
    let mut sink = |_: &[i64], p: &DVector<f64>| {
        let g = match bx.gauge(p, cfg) {
            Ok(g) => g,
            Err(e) => {
                gauge_err = Some(e);
                return ControlFlow::Break(());
            }
        };
        let q = if g > 1.0 { p / g } else { p.clone() };
        best = best.max(by_gauge(&(t * q)));
        ControlFlow::Continue(())
    };
    enumeration::enumerate(&difference, &lat.basis, cfg, &mut sink)?;
    if let Some(e) = gauge_err {
        return Err(e);
    }
    Ok(best)
}

/// Polyhedral approximation of a symmetric body: a symmetric polytope `P`
/// with `K ⊆ P ⊆ (1+eps) K`, built from a net over a shrunk polar body.
///
/// The net scale is `eps / (2 (1 + eps))`, which makes the separation bound
/// come out at exactly `(1+eps)`.
pub fn polyhedral_approx(
    body: &CenteredBody,
    eps: f64,
    cfg: &EngineConfig,
) -> Result<BodyDescriptor> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("need 0 < eps <= 1, got {eps}"),
        });
    }
    if !body.symmetric || body.center.amax() != 0.0 {
        return Err(Error::InvalidParameter {
            name: "body",
            reason: "polyhedral approximation requires symmetry about the origin".into(),
        });
    }
    let polar = polar_body(body, cfg)?;
    let sigma = eps / (2.0 * (1.0 + eps));
    let covering = thin_lattice_symmetric(&polar, &GlsProvider, cfg)?;
    let shrunk = polar.scale(1.0 - sigma);
    let cover_body = polar.scale(sigma);
    let lat = covering.scaled_with_body(sigma);
    let difference = shrunk.minkowski_sum(&cover_body.negate());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut gauge_err = None;
    let mut sink = |_: &[i64], a: &DVector<f64>| {
        if a.amax() == 0.0 {
            return ControlFlow::Continue(());
        }
        let g = match polar.gauge(a, cfg) {
            Ok(g) => g,
            Err(e) => {
                gauge_err = Some(e);
                return ControlFlow::Break(());
            }
        };
        let a = if g > 1.0 { a / g } else { a.clone() };
        rows.push(a.iter().copied().collect());
        rows.push(a.iter().map(|v| -v).collect());
        ControlFlow::Continue(())
    };
    enumeration::enumerate(&difference, &lat.basis, cfg, &mut sink)?;
    if let Some(e) = gauge_err {
        return Err(e);
    }
    if rows.is_empty() {
        return Err(Error::CertificateMissing);
    }
    let b = vec![1.0; rows.len()];
    Ok(BodyDescriptor::Hpolytope { a: rows, b })
}

/// Polar of a symmetric body about the origin. Polytopes dualize to hulls
/// of their scaled facet normals and ellipsoids to ellipsoids; everything
/// else becomes a support-threshold oracle.
pub fn polar_body(body: &CenteredBody, cfg: &EngineConfig) -> Result<CenteredBody> {
    let n = body.dim;
    if let BodyShape::Constraints(cons) = body.shape() {
        if cons.iter().all(|c| matches!(c, Constraint::Linear { .. })) {
            let mut points = Vec::with_capacity(cons.len());
            for c in cons {
                let Constraint::Linear { a, b } = c else { unreachable!() };
                if *b <= 0.0 {
                    return Err(Error::NonCenteredBody(*b));
                }
                points.push(a / *b);
            }
            if n == 2 {
                if let Some(cons) = hull_halfplanes_2d(&points) {
                    return Ok(CenteredBody::from_constraints(
                        cons,
                        DVector::zeros(n),
                        1.0 / body.outer_radius,
                        1.0 / body.inner_radius,
                        true,
                    ));
                }
            }
            let mut out = CenteredBody::from_constraints(
                Vec::new(),
                DVector::zeros(n),
                1.0 / body.outer_radius,
                1.0 / body.inner_radius,
                true,
            );
            out.shape = BodyShape::Hull(points);
            return Ok(out);
        }
        if cons.len() == 1 {
            if let Constraint::Quadratic { q, t } = &cons[0] {
                if t.amax() == 0.0 {
                    let q_inv = q
                        .clone()
                        .try_inverse()
                        .ok_or(Error::ProviderFailure("singular ellipsoid".into()))?;
                    return Ok(CenteredBody::from_constraints(
                        vec![Constraint::Quadratic {
                            q: (&q_inv + q_inv.transpose()) * 0.5,
                            t: DVector::zeros(n),
                        }],
                        DVector::zeros(n),
                        1.0 / body.outer_radius,
                        1.0 / body.inner_radius,
                        true,
                    ));
                }
            }
        }
    }
    // Oracle polar: membership via the support function of the body,
    // evaluated by weak maximization of a linear functional.
    let inner = body.clone();
    let cfg_inner = cfg.clone();
    let support = move |a: &DVector<f64>, _delta: f64| {
        let obj = crate::convexopt::LinearObjective(-a);
        match crate::convexopt::weak_minimize(&inner, &obj, 1e-7, &cfg_inner) {
            Ok((_, v)) => -v <= 1.0,
            Err(_) => false,
        }
    };
    Ok(CenteredBody::from_oracle(
        std::sync::Arc::new(support),
        DVector::zeros(n),
        1.0 / body.outer_radius,
        1.0 / body.inner_radius,
        true,
        cfg.oracle_delta,
    ))
}

/// Edge halfplanes of the planar convex hull of a point set, by angular
/// sweep; returns `None` for degenerate input.
fn hull_halfplanes_2d(points: &[DVector<f64>]) -> Option<Vec<Constraint>> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return None;
    }
    let cross =
        |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return None;
    }
    let hull = lower;
    let m = hull.len();
    let mut cons = Vec::with_capacity(m);
    for i in 0..m {
        let a = hull[i];
        let b = hull[(i + 1) % m];
        let normal = DVector::from_vec(vec![b[1] - a[1], a[0] - b[0]]);
        let len = normal.norm();
        if len <= 1e-14 {
            return None;
        }
        let normal = normal / len;
        let offset = normal[0] * a[0] + normal[1] * a[1];
        if offset <= 0.0 {
            return None;
        }
        cons.push(Constraint::Linear { a: normal, b: offset });
    }
    Some(cons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::descriptor::{compile, PExponent};

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn identity_norm_l2_to_l2() {
        let config = cfg();
        let bx = CenteredBody::ball(2, 1.0);
        let t = DMatrix::identity(2, 2);
        let by = |y: &DVector<f64>| y.norm();
        let eps = 0.5;
        let v = operator_norm(&t, &bx, &by, eps, &config).unwrap();
        assert!(v <= 1.0 + 1e-6, "v={v}");
        assert!(v >= 1.0 - eps / 2.0 - 1e-6, "v={v}");
    }

    #[test]
    fn zero_map_norm() {
        let config = cfg();
        let bx = compile(
            &crate::geometry::BodyDescriptor::Lpball {
                p: PExponent(f64::INFINITY),
                radius: 1.0,
                dim: 2,
            },
            &config,
        )
        .unwrap();
        let t = DMatrix::zeros(2, 2);
        let by = |y: &DVector<f64>| y.amax();
        let v = operator_norm(&t, &bx, &by, 0.5, &config).unwrap();
        assert_eq!(v, 0.0);
    }
}
