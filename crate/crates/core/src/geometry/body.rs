//! Convex bodies presented by (weak) membership oracles with sandwiching
//! metadata, plus the body algebra: scaling, translation, reflection,
//! intersection, Kovner-Besicovitch symmetrization and affine images.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::constraint::Constraint;
use crate::config::EngineConfig;
use crate::error::{Error, Result};

/// Membership oracle: `(point, tolerance)` to in/out. The weak-oracle
/// contract only requires correct answers for points at distance more than
/// the tolerance from the boundary.
pub type MembershipFn = Arc<dyn Fn(&DVector<f64>, f64) -> bool + Send + Sync>;

/// Internal representation backing a body's oracle.
#[derive(Clone)]
pub enum BodyShape {
    /// Intersection of exact convex constraints.
    Constraints(Vec<Constraint>),
    /// Minkowski sum of the two bodies.
    MinkSum(Box<CenteredBody>, Box<CenteredBody>),
    /// Convex hull of a finite point set.
    Hull(Vec<DVector<f64>>),
    /// Black-box membership oracle.
    Oracle(MembershipFn),
}

impl std::fmt::Debug for BodyShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BodyShape::Constraints(c) => write!(f, "Constraints({})", c.len()),
            BodyShape::MinkSum(..) => write!(f, "MinkSum"),
            BodyShape::Hull(p) => write!(f, "Hull({})", p.len()),
            BodyShape::Oracle(_) => write!(f, "Oracle"),
        }
    }
}

/// A convex body `K` with a certified Euclidean sandwich
/// `center + r B2 ⊆ K ⊆ center + R B2`.
#[derive(Debug, Clone)]
pub struct CenteredBody {
    pub(crate) shape: BodyShape,
    pub center: DVector<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// True only when the body is certified to satisfy `-K = K` about its
    /// center.
    pub symmetric: bool,
    pub dim: usize,
    /// Accumulated weak-oracle tolerance of derived oracles.
    pub oracle_slack: f64,
}

impl CenteredBody {
    pub fn from_constraints(
        constraints: Vec<Constraint>,
        center: DVector<f64>,
        inner_radius: f64,
        outer_radius: f64,
        symmetric: bool,
    ) -> Self {
        let dim = center.len();
        CenteredBody {
            shape: BodyShape::Constraints(constraints),
            center,
            inner_radius,
            outer_radius,
            symmetric,
            dim,
            oracle_slack: 0.0,
        }
    }

    pub fn from_oracle(
        oracle: MembershipFn,
        center: DVector<f64>,
        inner_radius: f64,
        outer_radius: f64,
        symmetric: bool,
        oracle_slack: f64,
    ) -> Self {
        let dim = center.len();
        CenteredBody {
            shape: BodyShape::Oracle(oracle),
            center,
            inner_radius,
            outer_radius,
            symmetric,
            dim,
            oracle_slack,
        }
    }

    /// Euclidean unit ball scaled by `radius`.
    pub fn ball(dim: usize, radius: f64) -> Self {
        CenteredBody::from_constraints(
            vec![Constraint::Quadratic {
                q: DMatrix::identity(dim, dim) / (radius * radius),
                t: DVector::zeros(dim),
            }],
            DVector::zeros(dim),
            radius,
            radius,
            true,
        )
    }

    pub fn shape(&self) -> &BodyShape {
        &self.shape
    }

    /// Constraint list when the body is in exact constraint form.
    pub fn constraints(&self) -> Option<&[Constraint]> {
        match &self.shape {
            BodyShape::Constraints(c) => Some(c),
            _ => None,
        }
    }

    /// Re-wraps the body as a pure membership oracle, discarding structure.
    /// Exercises the generic weak-oracle paths in tests.
    pub fn as_oracle_only(&self) -> Self {
        let inner = self.clone();
        let cfg = EngineConfig::default();
        CenteredBody::from_oracle(
            Arc::new(move |x, delta| inner.contains_with(x, delta, &cfg)),
            self.center.clone(),
            self.inner_radius,
            self.outer_radius,
            self.symmetric,
            self.oracle_slack,
        )
    }

    /// Membership at the body's accumulated tolerance.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.contains_with(x, 0.0, &EngineConfig::default())
    }

    /// Weak membership; `delta` is the caller's tolerance and is folded into
    /// the oracle slack of derived bodies.
    pub fn contains_with(&self, x: &DVector<f64>, delta: f64, cfg: &EngineConfig) -> bool {
        match &self.shape {
            BodyShape::Constraints(cons) => cons.iter().all(|c| c.eval(x) <= 0.0),
            BodyShape::Oracle(oracle) => oracle(x, delta.max(cfg.oracle_delta)),
            BodyShape::MinkSum(..) | BodyShape::Hull(_) => {
                crate::convexopt::fiber::membership_by_program(self, x, cfg)
            }
        }
    }

    /// Gauge of the body about its own center:
    /// `inf { s >= 0 : x - center ∈ s (K - center) }`.
    ///
    /// Exact constraint forms evaluate in closed form; hulls solve a small
    /// linear program; everything else bisects membership along the ray with
    /// the initial bracket taken from the sandwich radii.
    pub fn gauge(&self, x: &DVector<f64>, cfg: &EngineConfig) -> Result<f64> {
        if self.inner_radius <= 0.0 {
            return Err(Error::NonCenteredBody(self.inner_radius));
        }
        let v = x - &self.center;
        let norm = v.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        match &self.shape {
            BodyShape::Constraints(cons) => {
                // Constraints are stated in absolute coordinates; recenter.
                let mut g: f64 = 0.0;
                for c in cons {
                    g = g.max(c.translate(&(-&self.center)).ray_gauge(&v));
                }
                Ok(g)
            }
            BodyShape::Hull(points) => {
                crate::convexopt::fiber::hull_gauge(points, &self.center, &v)
            }
            _ => self.gauge_by_bisection(&v, norm, cfg),
        }
    }

    fn gauge_by_bisection(&self, v: &DVector<f64>, norm: f64, cfg: &EngineConfig) -> Result<f64> {
        let mut lo = norm / self.outer_radius;
        let mut hi = norm / self.inner_radius;
        // Widen defensively: the sandwich data may be conservative.
        let inside = |s: f64| {
            let p = &self.center + v / s;
            self.contains_with(&p, cfg.oracle_delta, cfg)
        };
        if inside(lo) {
            return Ok(lo);
        }
        let mut budget = cfg.gauge_budget;
        while !inside(hi) {
            hi *= 2.0;
            budget = budget.saturating_sub(1);
            if budget == 0 {
                return Err(Error::ToleranceTooSmall(cfg.gauge_tol));
            }
        }
        for _ in 0..cfg.gauge_budget {
            if hi - lo <= cfg.gauge_tol * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi - lo > 2.0 * cfg.gauge_tol * hi.max(1.0) {
            return Err(Error::ToleranceTooSmall(cfg.gauge_tol));
        }
        Ok(hi)
    }

    /// The same body with its certified center moved to another interior
    /// point. The inner radius shrinks by the cone factor `1 - gauge` of the
    /// new center about the old one.
    pub fn recentered_at(&self, new_center: &DVector<f64>, cfg: &EngineConfig) -> Result<Self> {
        let gamma = self.gauge(new_center, cfg)?;
        if gamma >= 1.0 {
            return Err(Error::CenterOutsideBody(gamma));
        }
        let mut out = self.clone();
        out.inner_radius = (1.0 - gamma) * self.inner_radius;
        out.outer_radius = self.outer_radius + (new_center - &self.center).norm();
        out.center = new_center.clone();
        out.symmetric = false;
        Ok(out)
    }

    /// Translated body `K + v`.
    pub fn translate(&self, v: &DVector<f64>) -> Self {
        let mut out = self.clone();
        out.center = &self.center + v;
        out.shape = match &self.shape {
            BodyShape::Constraints(cons) => {
                BodyShape::Constraints(cons.iter().map(|c| c.translate(v)).collect())
            }
            BodyShape::Hull(points) => BodyShape::Hull(points.iter().map(|p| p + v).collect()),
            BodyShape::MinkSum(l, r) => {
                BodyShape::MinkSum(Box::new(l.translate(v)), r.clone())
            }
            BodyShape::Oracle(oracle) => {
                let oracle = oracle.clone();
                let v = v.clone();
                BodyShape::Oracle(Arc::new(move |x, delta| oracle(&(x - &v), delta)))
            }
        };
        out
    }

    /// Scaled body `s K` about the origin, `s > 0`.
    pub fn scale(&self, s: f64) -> Self {
        assert!(s > 0.0, "scale must be positive");
        let mut out = self.clone();
        out.center = &self.center * s;
        out.inner_radius = self.inner_radius * s;
        out.outer_radius = self.outer_radius * s;
        out.oracle_slack = self.oracle_slack * s;
        out.shape = match &self.shape {
            BodyShape::Constraints(cons) => {
                BodyShape::Constraints(cons.iter().map(|c| c.scale(s)).collect())
            }
            BodyShape::Hull(points) => BodyShape::Hull(points.iter().map(|p| p * s).collect()),
            BodyShape::MinkSum(l, r) => {
                BodyShape::MinkSum(Box::new(l.scale(s)), Box::new(r.scale(s)))
            }
            BodyShape::Oracle(oracle) => {
                let oracle = oracle.clone();
                BodyShape::Oracle(Arc::new(move |x, delta| oracle(&(x / s), delta / s)))
            }
        };
        out
    }

    /// Reflected body `-K`.
    pub fn negate(&self) -> Self {
        let mut out = self.clone();
        out.center = -&self.center;
        out.shape = match &self.shape {
            BodyShape::Constraints(cons) => {
                BodyShape::Constraints(cons.iter().map(|c| c.negate()).collect())
            }
            BodyShape::Hull(points) => BodyShape::Hull(points.iter().map(|p| -p).collect()),
            BodyShape::MinkSum(l, r) => {
                BodyShape::MinkSum(Box::new(l.negate()), Box::new(r.negate()))
            }
            BodyShape::Oracle(oracle) => {
                let oracle = oracle.clone();
                BodyShape::Oracle(Arc::new(move |x, delta| oracle(&(-x), delta)))
            }
        };
        out
    }

    /// Affine image `M K` of a nonsingular matrix `M`.
    pub fn affine_image(&self, m: &DMatrix<f64>) -> Result<Self> {
        let m_inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::BadDescriptor("affine matrix is singular".into()))?;
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 1e-12 * smax {
            return Err(Error::BadDescriptor("affine matrix is singular".into()));
        }
        let mut out = self.clone();
        out.center = m * &self.center;
        out.inner_radius = self.inner_radius * smin;
        out.outer_radius = self.outer_radius * smax;
        out.oracle_slack = self.oracle_slack * smax;
        out.shape = match &self.shape {
            BodyShape::Constraints(cons) => {
                BodyShape::Constraints(cons.iter().map(|c| c.affine_image(&m_inv)).collect())
            }
            BodyShape::Hull(points) => BodyShape::Hull(points.iter().map(|p| m * p).collect()),
            BodyShape::MinkSum(l, r) => BodyShape::MinkSum(
                Box::new(l.affine_image(m)?),
                Box::new(r.affine_image(m)?),
            ),
            BodyShape::Oracle(oracle) => {
                let oracle = oracle.clone();
                let m_inv = m_inv.clone();
                BodyShape::Oracle(Arc::new(move |x, delta| oracle(&(&m_inv * x), delta / smax)))
            }
        };
        Ok(out)
    }

    /// Minkowski sum `K + other`; membership is decided by optimization, not
    /// by an oracle product. Pairs of planar polytopes reduce to an exact
    /// polytope: in the plane the facet normals of a sum are the union of
    /// the summands' facet normals.
    pub fn minkowski_sum(&self, other: &CenteredBody) -> Self {
        if self.dim == 2 {
            if let Some(exact) = self.minkowski_sum_exact_2d(other) {
                return exact;
            }
        }
        let dim = self.dim;
        CenteredBody {
            shape: BodyShape::MinkSum(Box::new(self.clone()), Box::new(other.clone())),
            center: &self.center + &other.center,
            inner_radius: self.inner_radius + other.inner_radius,
            outer_radius: self.outer_radius + other.outer_radius,
            symmetric: false,
            dim,
            oracle_slack: self.oracle_slack + other.oracle_slack,
        }
    }

    fn minkowski_sum_exact_2d(&self, other: &CenteredBody) -> Option<Self> {
        let lin_rows = |b: &CenteredBody| -> Option<Vec<(DVector<f64>, f64)>> {
            let BodyShape::Constraints(cons) = b.shape() else { return None };
            let mut rows = Vec::with_capacity(cons.len());
            for c in cons {
                let Constraint::Linear { a, b } = c else { return None };
                let n = a.norm();
                if n <= 1e-14 {
                    return None;
                }
                rows.push((a / n, b / n));
            }
            Some(rows)
        };
        let ra = lin_rows(self)?;
        let rb = lin_rows(other)?;
        let mut normals: Vec<DVector<f64>> = Vec::new();
        for (u, _) in ra.iter().chain(rb.iter()) {
            if !normals.iter().any(|v| (v - u).amax() < 1e-12) {
                normals.push(u.clone());
            }
        }
        let support = |rows: &[(DVector<f64>, f64)], u: &DVector<f64>| -> Option<f64> {
            let m = rows.len();
            let mut a = DMatrix::zeros(m, 2);
            let mut b = DVector::zeros(m);
            for (i, (n, c)) in rows.iter().enumerate() {
                a[(i, 0)] = n[0];
                a[(i, 1)] = n[1];
                b[i] = *c;
            }
            match crate::convexopt::simplex::solve_lp(u, &a, &b) {
                crate::convexopt::simplex::LpOutcome::Optimal { value, .. } => Some(value),
                _ => None,
            }
        };
        let mut cons = Vec::with_capacity(normals.len());
        for u in &normals {
            let h = support(&ra, u)? + support(&rb, u)?;
            cons.push(Constraint::Linear { a: u.clone(), b: h });
        }
        Some(CenteredBody {
            shape: BodyShape::Constraints(cons),
            center: &self.center + &other.center,
            inner_radius: self.inner_radius + other.inner_radius,
            outer_radius: self.outer_radius + other.outer_radius,
            symmetric: self.symmetric
                && other.symmetric
                && self.center.amax() == 0.0
                && other.center.amax() == 0.0,
            dim: 2,
            oracle_slack: self.oracle_slack + other.oracle_slack,
        })
    }

    /// Intersection with a certified interior point chosen on the segment
    /// between the two centers.
    pub fn intersect(&self, other: &CenteredBody) -> Result<Self> {
        let (center, inner) = best_common_ball(self, other)?;
        let outer = (self.outer_radius + (&center - &self.center).norm())
            .min(other.outer_radius + (&center - &other.center).norm());
        let shape = match (&self.shape, &other.shape) {
            (BodyShape::Constraints(a), BodyShape::Constraints(b)) => {
                let mut cons = a.clone();
                cons.extend(b.iter().cloned());
                BodyShape::Constraints(cons)
            }
            _ => {
                let l = self.clone();
                let r = other.clone();
                let cfg = EngineConfig::default();
                BodyShape::Oracle(Arc::new(move |x, delta| {
                    l.contains_with(x, delta, &cfg) && r.contains_with(x, delta, &cfg)
                }))
            }
        };
        Ok(CenteredBody {
            shape,
            center,
            inner_radius: inner,
            outer_radius: outer,
            symmetric: false,
            dim: self.dim,
            oracle_slack: self.oracle_slack + other.oracle_slack,
        })
    }
}

/// Largest ball certified inside both bodies from their sandwich data alone,
/// searched along the segment between the two centers.
fn best_common_ball(a: &CenteredBody, b: &CenteredBody) -> Result<(DVector<f64>, f64)> {
    let d = (&b.center - &a.center).norm();
    if d <= 1e-15 {
        return Ok((a.center.clone(), a.inner_radius.min(b.inner_radius)));
    }
    // radius(t) = min(r_a - t d, r_b - (1 - t) d) for center (1-t) a + t b;
    // the max over t in [0,1] balances the two terms.
    let t = ((b.inner_radius - a.inner_radius + d) / (2.0 * d)).clamp(0.0, 1.0);
    let center = &a.center * (1.0 - t) + &b.center * t;
    let r = (a.inner_radius - t * d).min(b.inner_radius - (1.0 - t) * d);
    if r <= 0.0 {
        return Err(Error::EmptyInterior(r));
    }
    Ok((center, r))
}

/// Kovner-Besicovitch symmetrization `K[c] = (K - c) ∩ (c - K)`, returned
/// as a symmetric body centered at the origin.
pub fn kb_body(k: &CenteredBody, c: &DVector<f64>, cfg: &EngineConfig) -> Result<CenteredBody> {
    let gamma = k.gauge(c, cfg)?;
    if gamma >= 1.0 + cfg.gauge_tol && !k.contains_with(c, cfg.oracle_delta, cfg) {
        return Err(Error::CenterOutsideBody(gamma));
    }
    // A ball of radius (1 - gamma) r about c sits inside K, hence inside K[c].
    let inner = ((1.0 - gamma.min(1.0)) * k.inner_radius).max(0.0);
    if inner <= 0.0 {
        return Err(Error::CenterOutsideBody(gamma));
    }
    let outer = k.outer_radius + (c - &k.center).norm();
    let shape = match &k.shape {
        BodyShape::Constraints(cons) => {
            // Constraints of K - c plus constraints of c - K = -(K - c).
            let minus_c = -c;
            let shifted: Vec<Constraint> = cons.iter().map(|cc| cc.translate(&minus_c)).collect();
            let mut all = shifted.clone();
            all.extend(shifted.iter().map(|cc| cc.negate()));
            BodyShape::Constraints(all)
        }
        _ => {
            let inner_body = k.clone();
            let c = c.clone();
            let cfg = cfg.clone();
            BodyShape::Oracle(Arc::new(move |x: &DVector<f64>, delta: f64| {
                inner_body.contains_with(&(&c + x), delta, &cfg)
                    && inner_body.contains_with(&(&c - x), delta, &cfg)
            }))
        }
    };
    Ok(CenteredBody {
        shape,
        center: DVector::zeros(k.dim),
        inner_radius: inner,
        outer_radius: outer,
        symmetric: true,
        dim: k.dim,
        oracle_slack: 2.0 * k.oracle_slack,
    })
}
