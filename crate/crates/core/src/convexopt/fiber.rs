//! Fiber feasibility and distance minimization.
//!
//! A fiber is an affine subspace `{ directions * w + offset }`. Enumeration
//! asks, once per search-tree node, whether a fiber meets the body; bodies
//! with exact constraint form answer through small exact programs (interval
//! reduction, a simplex call, or a deep-cut subgradient solve), while pure
//! oracle bodies fall back to weak minimization of the squared Euclidean
//! distance to the fiber.

use nalgebra::{DMatrix, DVector};

use super::engine::{weak_minimize, Objective};
use super::simplex::feasible_point;
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::constraint::{pnorm, pnorm_subgradient};
use crate::geometry::{BodyShape, CenteredBody, Constraint};

/// Affine subspace `{ directions w + offset : w ∈ R^k }`.
#[derive(Debug, Clone)]
pub struct Fiber {
    pub directions: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl Fiber {
    pub fn point(offset: DVector<f64>) -> Self {
        let n = offset.len();
        Fiber {
            directions: DMatrix::zeros(n, 0),
            offset,
        }
    }

    pub fn k(&self) -> usize {
        self.directions.ncols()
    }

    pub fn at(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.directions * w + &self.offset
    }

    /// Orthogonal projection onto the fiber.
    pub fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        if self.k() == 0 {
            return self.offset.clone();
        }
        let qr = self.directions.clone().qr();
        let q = qr.q();
        let d = y - &self.offset;
        &self.offset + &q * (q.transpose() * d)
    }

    /// Least-squares coefficients of the projection of `y`.
    pub fn coefficients(&self, y: &DVector<f64>) -> DVector<f64> {
        if self.k() == 0 {
            return DVector::zeros(0);
        }
        let gram = self.directions.transpose() * &self.directions;
        let rhs = self.directions.transpose() * (y - &self.offset);
        gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(self.k()))
    }
}

/// Constraint lowered onto program variables `z` (fiber coefficients plus any
/// lifted variables).
enum Lowered {
    /// `a . z <= b`, with `a` scaled to unit norm.
    Lin { a: DVector<f64>, b: f64 },
    /// `z^T p z + q . z + r <= 0`
    Quad {
        p: DMatrix<f64>,
        q: DVector<f64>,
        r: f64,
    },
    /// `|| m z + c ||_p <= 1`
    Norm {
        m: DMatrix<f64>,
        c: DVector<f64>,
        p: f64,
    },
}

impl Lowered {
    fn eval(&self, z: &DVector<f64>) -> f64 {
        match self {
            Lowered::Lin { a, b } => a.dot(z) - b,
            Lowered::Quad { p, q, r } => (p * z).dot(z) + q.dot(z) + r,
            Lowered::Norm { m, c, p } => pnorm(&(m * z + c), *p) - 1.0,
        }
    }

    fn subgradient(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            Lowered::Lin { a, .. } => a.clone(),
            Lowered::Quad { p, q, .. } => (p * z) * 2.0 + q,
            Lowered::Norm { m, c, p } => m.transpose() * pnorm_subgradient(&(m * z + c), *p),
        }
    }

    fn is_linear(&self) -> bool {
        matches!(self, Lowered::Lin { .. })
    }
}

/// Affine substitution `x = basis * z_slice + offset` selecting a slice of
/// the program variables.
struct VarMap {
    start: usize,
    basis: DMatrix<f64>,
    offset: DVector<f64>,
}

impl VarMap {
    fn embed(&self, total: usize) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.basis.nrows();
        let k = self.basis.ncols();
        let mut s = DMatrix::zeros(n, total);
        s.view_mut((0, self.start), (n, k)).copy_from(&self.basis);
        (s, self.offset.clone())
    }
}

struct Program {
    dim: usize,
    cons: Vec<Lowered>,
    radius: f64,
    seed: DVector<f64>,
}

impl Program {
    fn lower_constraint(&mut self, c: &Constraint, s: &DMatrix<f64>, o: &DVector<f64>) {
        match c {
            Constraint::Linear { a, b } => {
                let av = s.transpose() * a;
                let bv = b - a.dot(o);
                let norm = av.norm();
                if norm <= 1e-14 {
                    // Constant constraint; keep it as a trivial row so that
                    // infeasible constants are not lost.
                    self.cons.push(Lowered::Lin {
                        a: av,
                        b: if bv >= 0.0 { 1.0 } else { -1.0 },
                    });
                } else {
                    self.cons.push(Lowered::Lin {
                        a: &av / norm,
                        b: bv / norm,
                    });
                }
            }
            Constraint::Quadratic { q, t } => {
                let d = o - t;
                let qs = q * s;
                let p = s.transpose() * &qs;
                let lin = (qs.transpose() * &d) * 2.0;
                let r = (q * &d).dot(&d) - 1.0;
                self.cons.push(Lowered::Quad {
                    p: (&p + p.transpose()) * 0.5,
                    q: lin,
                    r,
                });
            }
            Constraint::PNorm { d, t, p } => {
                self.cons.push(Lowered::Norm {
                    m: d * s,
                    c: d * (o - t),
                    p: *p,
                });
            }
        }
    }
}

/// Recursively lower a body-membership condition `x = map(z) ∈ body` into
/// the program, lifting variables for Minkowski summands and hulls.
/// Fails on pure oracle shapes.
fn add_membership(pr: &mut Program, body: &CenteredBody, map: VarMap) -> std::result::Result<(), ()> {
    match body.shape() {
        BodyShape::Constraints(cons) => {
            let (s, o) = map.embed(pr.dim);
            for c in cons {
                pr.lower_constraint(c, &s, &o);
            }
            Ok(())
        }
        BodyShape::MinkSum(l, r) => {
            // x = u + v: lift u, constrain u ∈ L and x - u ∈ R.
            let n = body.dim;
            let start = pr.dim;
            pr.dim += n;
            pr.radius = (pr.radius.powi(2)
                + (l.center.norm() + l.outer_radius).powi(2))
            .sqrt();
            grow(pr, n);
            for i in 0..n {
                pr.seed[start + i] = l.center[i];
            }
            add_membership(
                pr,
                l,
                VarMap {
                    start,
                    basis: DMatrix::identity(n, n),
                    offset: DVector::zeros(n),
                },
            )?;
            // v = map(z) - u over the combined variables.
            let (s_x, o_x) = map.embed(pr.dim);
            let mut s = s_x;
            for i in 0..n {
                s[(i, start + i)] -= 1.0;
            }
            add_membership_embedded(pr, r, s, o_x)
        }
        BodyShape::Hull(points) => {
            let q = points.len();
            let n = body.dim;
            let start = pr.dim;
            pr.dim += q;
            pr.radius = (pr.radius.powi(2) + q as f64).sqrt();
            grow(pr, q);
            for i in 0..q {
                pr.seed[start + i] = 1.0 / q as f64;
            }
            // lambda >= 0, sum lambda = 1, sum lambda p_i = x.
            for i in 0..q {
                let mut a = DVector::zeros(pr.dim);
                a[start + i] = -1.0;
                pr.cons.push(Lowered::Lin { a, b: 0.0 });
            }
            let mut ones = DVector::zeros(pr.dim);
            for i in 0..q {
                ones[start + i] = 1.0;
            }
            pr.cons.push(Lowered::Lin {
                a: ones.clone() / (q as f64).sqrt(),
                b: 1.0 / (q as f64).sqrt(),
            });
            pr.cons.push(Lowered::Lin {
                a: -ones.clone() / (q as f64).sqrt(),
                b: -1.0 / (q as f64).sqrt(),
            });
            let (s_x, o_x) = map.embed(pr.dim);
            for row in 0..n {
                let mut a = DVector::zeros(pr.dim);
                for j in 0..pr.dim {
                    a[j] = -s_x[(row, j)];
                }
                for (i, p) in points.iter().enumerate() {
                    a[start + i] += p[row];
                }
                let norm = a.norm().max(1e-14);
                pr.cons.push(Lowered::Lin {
                    a: &a / norm,
                    b: o_x[row] / norm,
                });
                pr.cons.push(Lowered::Lin {
                    a: -(&a / norm),
                    b: -o_x[row] / norm,
                });
            }
            Ok(())
        }
        BodyShape::Oracle(_) => Err(()),
    }
}

fn add_membership_embedded(
    pr: &mut Program,
    body: &CenteredBody,
    s: DMatrix<f64>,
    o: DVector<f64>,
) -> std::result::Result<(), ()> {
    match body.shape() {
        BodyShape::Constraints(cons) => {
            // Re-embed to the current dimension in case lifting grew it.
            let s = pad_cols(&s, pr.dim);
            for c in cons {
                pr.lower_constraint(c, &s, &o);
            }
            Ok(())
        }
        BodyShape::MinkSum(l, r) => {
            let n = body.dim;
            let start = pr.dim;
            pr.dim += n;
            pr.radius = (pr.radius.powi(2)
                + (l.center.norm() + l.outer_radius).powi(2))
            .sqrt();
            grow(pr, n);
            for i in 0..n {
                pr.seed[start + i] = l.center[i];
            }
            add_membership(
                pr,
                l,
                VarMap {
                    start,
                    basis: DMatrix::identity(n, n),
                    offset: DVector::zeros(n),
                },
            )?;
            let mut s2 = pad_cols(&s, pr.dim);
            for i in 0..n {
                s2[(i, start + i)] -= 1.0;
            }
            add_membership_embedded(pr, r, s2, o)
        }
        BodyShape::Hull(_) => {
            // Route hulls through the VarMap-based path with an identity
            // prefix; reuse add_membership by expressing the map directly.
            let n = body.dim;
            let start = pr.dim;
            pr.dim += n;
            grow(pr, n);
            pr.radius = (pr.radius.powi(2)
                + (body.center.norm() + body.outer_radius).powi(2))
            .sqrt();
            for i in 0..n {
                pr.seed[start + i] = body.center[i];
            }
            // New vars y with y ∈ hull and y = s z + o.
            add_membership(
                pr,
                body,
                VarMap {
                    start,
                    basis: DMatrix::identity(n, n),
                    offset: DVector::zeros(n),
                },
            )?;
            let s = pad_cols(&s, pr.dim);
            for row in 0..n {
                let mut a = DVector::zeros(pr.dim);
                for j in 0..pr.dim {
                    a[j] = s[(row, j)];
                }
                a[start + row] -= 1.0;
                let norm = a.norm().max(1e-14);
                pr.cons.push(Lowered::Lin {
                    a: &a / norm,
                    b: -o[row] / norm,
                });
                pr.cons.push(Lowered::Lin {
                    a: -(&a / norm),
                    b: o[row] / norm,
                });
            }
            Ok(())
        }
        BodyShape::Oracle(_) => Err(()),
    }
}

fn grow(pr: &mut Program, extra: usize) {
    for c in &mut pr.cons {
        match c {
            Lowered::Lin { a, .. } => {
                *a = pad_vec(a, pr.dim);
            }
            Lowered::Quad { p, q, .. } => {
                *p = pad_square(p, pr.dim);
                *q = pad_vec(q, pr.dim);
            }
            Lowered::Norm { m, .. } => {
                *m = pad_cols(m, pr.dim);
            }
        }
    }
    let mut seed = DVector::zeros(pr.dim);
    seed.rows_mut(0, pr.dim - extra).copy_from(&pr.seed);
    pr.seed = seed;
}

fn pad_vec(v: &DVector<f64>, dim: usize) -> DVector<f64> {
    if v.len() == dim {
        return v.clone();
    }
    let mut out = DVector::zeros(dim);
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

fn pad_cols(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    if m.ncols() == dim {
        return m.clone();
    }
    let mut out = DMatrix::zeros(m.nrows(), dim);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn pad_square(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    if m.ncols() == dim {
        return m.clone();
    }
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

/// Margin under which a program point counts as feasible; ties on the
/// boundary resolve to "inside" so that enumeration bands stay conservative.
const PROGRAM_MARGIN: f64 = 1e-9;

enum ProgramStatus {
    Feasible(DVector<f64>),
    Infeasible,
}

fn solve_program(pr: &Program) -> ProgramStatus {
    let d = pr.dim;
    if d == 0 {
        let worst = pr.cons.iter().map(|c| c.eval(&DVector::zeros(0))).fold(f64::MIN, f64::max);
        return if worst <= PROGRAM_MARGIN {
            ProgramStatus::Feasible(DVector::zeros(0))
        } else {
            ProgramStatus::Infeasible
        };
    }
    if pr.cons.iter().all(|c| c.is_linear()) {
        if d == 1 {
            return solve_linear_1d(pr);
        }
        let m = pr.cons.len();
        let mut a = DMatrix::zeros(m, d);
        let mut b = DVector::zeros(m);
        for (i, c) in pr.cons.iter().enumerate() {
            let Lowered::Lin { a: av, b: bv } = c else { unreachable!() };
            for j in 0..d {
                a[(i, j)] = av[j];
            }
            b[i] = *bv + PROGRAM_MARGIN;
        }
        return match feasible_point(&a, &b) {
            Some(z) => ProgramStatus::Feasible(z),
            None => ProgramStatus::Infeasible,
        };
    }
    if d == 1 {
        return solve_mixed_1d(pr);
    }
    solve_by_subgradient(pr)
}

fn solve_linear_1d(pr: &Program) -> ProgramStatus {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for c in &pr.cons {
        let Lowered::Lin { a, b } = c else { unreachable!() };
        let (av, bv) = (a[0], *b + PROGRAM_MARGIN);
        if av.abs() <= 1e-14 {
            if bv < 0.0 {
                return ProgramStatus::Infeasible;
            }
        } else if av > 0.0 {
            hi = hi.min(bv / av);
        } else {
            lo = lo.max(bv / av);
        }
        if lo > hi {
            return ProgramStatus::Infeasible;
        }
    }
    let z = feasible_interval_point(lo, hi);
    ProgramStatus::Feasible(DVector::from_vec(vec![z]))
}

fn feasible_interval_point(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

fn solve_mixed_1d(pr: &Program) -> ProgramStatus {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for c in &pr.cons {
        match c {
            Lowered::Lin { a, b } => {
                let (av, bv) = (a[0], *b + PROGRAM_MARGIN);
                if av.abs() <= 1e-14 {
                    if bv < 0.0 {
                        return ProgramStatus::Infeasible;
                    }
                } else if av > 0.0 {
                    hi = hi.min(bv / av);
                } else {
                    lo = lo.max(bv / av);
                }
            }
            Lowered::Quad { p, q, r } => {
                // p z^2 + q z + r <= margin
                let (pa, qa, ra) = (p[(0, 0)], q[0], r - PROGRAM_MARGIN);
                if pa.abs() <= 1e-14 {
                    if qa.abs() <= 1e-14 {
                        if ra > 0.0 {
                            return ProgramStatus::Infeasible;
                        }
                    } else if qa > 0.0 {
                        hi = hi.min(-ra / qa);
                    } else {
                        lo = lo.max(-ra / qa);
                    }
                } else {
                    let disc = qa * qa - 4.0 * pa * ra;
                    if disc < 0.0 {
                        return ProgramStatus::Infeasible;
                    }
                    let sq = disc.sqrt();
                    lo = lo.max((-qa - sq) / (2.0 * pa));
                    hi = hi.min((-qa + sq) / (2.0 * pa));
                }
            }
            Lowered::Norm { .. } => {}
        }
        if lo > hi {
            return ProgramStatus::Infeasible;
        }
    }
    // Norm constraints: restrict the interval by bisection around the
    // minimizer of each convex profile.
    for c in &pr.cons {
        let Lowered::Norm { .. } = c else { continue };
        let phi = |z: f64| c.eval(&DVector::from_vec(vec![z]));
        let bound = pr.radius.max(1.0) * 4.0;
        let (mut a, mut b) = (lo.max(-bound), hi.min(bound));
        if a > b {
            return ProgramStatus::Infeasible;
        }
        // Ternary search for the minimizer.
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if phi(m1) <= phi(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let zmin = 0.5 * (a + b);
        if phi(zmin) > PROGRAM_MARGIN {
            return ProgramStatus::Infeasible;
        }
        // Expand to the sublevel endpoints within [lo, hi].
        let left = if phi(lo.max(-bound)) <= PROGRAM_MARGIN {
            lo.max(-bound)
        } else {
            let (mut bad, mut good) = (lo.max(-bound), zmin);
            for _ in 0..100 {
                let mid = 0.5 * (bad + good);
                if phi(mid) <= PROGRAM_MARGIN {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        let right = if phi(hi.min(bound)) <= PROGRAM_MARGIN {
            hi.min(bound)
        } else {
            let (mut good, mut bad) = (zmin, hi.min(bound));
            for _ in 0..100 {
                let mid = 0.5 * (good + bad);
                if phi(mid) <= PROGRAM_MARGIN {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        lo = left;
        hi = right;
        if lo > hi {
            return ProgramStatus::Infeasible;
        }
    }
    let z = feasible_interval_point(lo, hi);
    ProgramStatus::Feasible(DVector::from_vec(vec![z]))
}

/// Deep-cut ellipsoid descent on the maximum constraint violation.
fn solve_by_subgradient(pr: &Program) -> ProgramStatus {
    let d = pr.dim;
    let df = d as f64;
    let radius = pr.radius.max(1.0) + pr.seed.norm() + 1.0;
    let mut center = pr.seed.clone();
    let mut p = DMatrix::<f64>::identity(d, d) * (radius * radius);
    let budget = (4.0 * df * df * (radius / PROGRAM_MARGIN).ln()).ceil() as usize;
    let mut best = f64::INFINITY;
    let mut best_z = center.clone();
    for _ in 0..budget {
        let mut worst = f64::MIN;
        let mut arg = None;
        for c in &pr.cons {
            let v = c.eval(&center);
            if v > worst {
                worst = v;
                arg = Some(c);
            }
        }
        if worst < best {
            best = worst;
            best_z = center.clone();
        }
        if worst <= -PROGRAM_MARGIN {
            return ProgramStatus::Feasible(center);
        }
        let g = arg.expect("nonempty constraint set").subgradient(&center);
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if gpg <= 1e-300 {
            break;
        }
        let sqrt_gpg = gpg.sqrt();
        // Deep cut: every feasible z satisfies g.(z - center) <= -worst.
        let alpha = worst.max(0.0) / sqrt_gpg;
        if alpha >= 1.0 {
            // The cut discards the whole ellipsoid.
            return ProgramStatus::Infeasible;
        }
        let tau = (1.0 + df * alpha) / (df + 1.0);
        let delta = df * df * (1.0 - alpha * alpha) / (df * df - 1.0);
        let sigma = 2.0 * (1.0 + df * alpha) / ((df + 1.0) * (1.0 + alpha));
        center -= (&pg / sqrt_gpg) * tau;
        p = (&p - (&pg * pg.transpose()) * (sigma / gpg)) * delta;
        p = (&p + p.transpose()) * 0.5;
        if p.diagonal().max() < PROGRAM_MARGIN * PROGRAM_MARGIN {
            break;
        }
    }
    if best <= PROGRAM_MARGIN {
        ProgramStatus::Feasible(best_z)
    } else {
        ProgramStatus::Infeasible
    }
}

/// Build the membership program for `fiber ∩ body` and solve it; falls back
/// to weak minimization for oracle shapes. Returns the fiber coefficients of
/// a witness when feasible.
pub fn fiber_feasible(
    body: &CenteredBody,
    fiber: &Fiber,
    cfg: &EngineConfig,
) -> Result<Option<DVector<f64>>> {
    let k = fiber.k();
    let mut pr = Program {
        dim: k,
        cons: Vec::new(),
        radius: coefficient_bound(body, fiber),
        seed: fiber.coefficients(&body.center),
    };
    let map = VarMap {
        start: 0,
        basis: fiber.directions.clone(),
        offset: fiber.offset.clone(),
    };
    if add_membership(&mut pr, body, map).is_ok() {
        return Ok(match solve_program(&pr) {
            ProgramStatus::Feasible(z) => Some(z.rows(0, k).into_owned()),
            ProgramStatus::Infeasible => None,
        });
    }
    // Oracle route: weak minimization of the squared distance to the fiber.
    let (d, witness) = fiber_distance(body, fiber, cfg)?;
    if d <= cfg.feas_tol {
        Ok(Some(fiber.coefficients(&witness)))
    } else {
        Ok(None)
    }
}

/// Conservative bound on fiber coefficients of points inside the body.
fn coefficient_bound(body: &CenteredBody, fiber: &Fiber) -> f64 {
    let k = fiber.k();
    if k == 0 {
        return 1.0;
    }
    let svd = fiber.directions.clone().svd(false, false);
    let smin = svd.singular_values.min().max(1e-12);
    ((&body.center - &fiber.offset).norm() + body.outer_radius) / smin
}

struct SquaredFiberDistance<'a> {
    fiber: &'a Fiber,
    q: DMatrix<f64>,
}

impl Objective for SquaredFiberDistance<'_> {
    fn value(&self, y: &DVector<f64>) -> f64 {
        let d = y - &self.fiber.offset;
        let residual = &d - &self.q * (self.q.transpose() * &d);
        residual.norm_squared()
    }
    fn subgradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let d = y - &self.fiber.offset;
        let residual = &d - &self.q * (self.q.transpose() * &d);
        residual * 2.0
    }
}

/// Minimum Euclidean distance between the body and the fiber, with a witness
/// point on the fiber. `d <= feas_tol` certifies the fiber meets the body.
pub fn fiber_distance(
    body: &CenteredBody,
    fiber: &Fiber,
    cfg: &EngineConfig,
) -> Result<(f64, DVector<f64>)> {
    let n = body.dim;
    let q = if fiber.k() == 0 {
        DMatrix::zeros(n, 0)
    } else {
        fiber.directions.clone().qr().q()
    };
    let obj = SquaredFiberDistance { fiber, q };
    let eps = (cfg.feas_tol * cfg.feas_tol).min(1e-10);
    let (y, value) = weak_minimize(body, &obj, eps, cfg)?;
    let witness = fiber.project(&y);
    Ok((value.max(0.0).sqrt(), witness))
}

/// Membership for Minkowski-sum and hull shapes, decided by the lifted
/// program at a fixed point.
pub fn membership_by_program(body: &CenteredBody, x: &DVector<f64>, cfg: &EngineConfig) -> bool {
    match fiber_feasible(body, &Fiber::point(x.clone()), cfg) {
        Ok(res) => res.is_some(),
        Err(_) => false,
    }
}

/// Exact gauge of a hull body about `center` along `v` via a small LP:
/// minimize the total hull weight representing `v`.
pub fn hull_gauge(
    points: &[DVector<f64>],
    center: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let n = center.len();
    let q = points.len();
    // Variables lambda >= 0; rows: -lambda_i <= 0 and equality
    // sum lambda_i (p_i - center) = v as two inequalities per coordinate.
    let mut a = DMatrix::zeros(q + 2 * n, q);
    let mut b = DVector::zeros(q + 2 * n);
    for i in 0..q {
        a[(i, i)] = -1.0;
    }
    for row in 0..n {
        for (i, p) in points.iter().enumerate() {
            a[(q + 2 * row, i)] = p[row] - center[row];
            a[(q + 2 * row + 1, i)] = -(p[row] - center[row]);
        }
        b[q + 2 * row] = v[row];
        b[q + 2 * row + 1] = -v[row];
    }
    let obj = DVector::from_element(q, -1.0);
    match super::simplex::solve_lp(&obj, &a, &b) {
        super::simplex::LpOutcome::Optimal { value, .. } => Ok(-value),
        _ => Err(Error::ToleranceTooSmall(0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn fiber_through_unit_ball_has_zero_distance() {
        let ball = CenteredBody::ball(2, 1.0);
        let fiber = Fiber {
            directions: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            offset: DVector::from_vec(vec![0.0, 0.5]),
        };
        let (d, witness) = fiber_distance(&ball.as_oracle_only(), &fiber, &cfg()).unwrap();
        assert!(d < 1e-4, "d={d}");
        assert!(witness[1] - 0.5 < 1e-9);
    }

    #[test]
    fn fiber_outside_unit_ball_distance_one() {
        let ball = CenteredBody::ball(2, 1.0);
        let fiber = Fiber {
            directions: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            offset: DVector::from_vec(vec![0.0, 2.0]),
        };
        let (d, _) = fiber_distance(&ball, &fiber, &cfg()).unwrap();
        assert!((d - 1.0).abs() < 1e-3, "d={d}");
    }

    #[test]
    fn exact_fiber_feasibility_on_ball_form() {
        let ball = CenteredBody::ball(2, 1.0);
        let hit = Fiber {
            directions: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            offset: DVector::from_vec(vec![0.0, 0.5]),
        };
        let miss = Fiber {
            directions: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            offset: DVector::from_vec(vec![0.0, 1.5]),
        };
        assert!(fiber_feasible(&ball, &hit, &cfg()).unwrap().is_some());
        assert!(fiber_feasible(&ball, &miss, &cfg()).unwrap().is_none());
    }

    #[test]
    fn minkowski_sum_membership() {
        // [-1,1]^2 + ball(0.5): point (1.4, 0) inside, (1.6, 0) outside.
        let cfg = cfg();
        let box2 = crate::geometry::descriptor::compile(
            &crate::geometry::BodyDescriptor::Lpball {
                p: crate::geometry::PExponent(f64::INFINITY),
                radius: 1.0,
                dim: 2,
            },
            &cfg,
        )
        .unwrap();
        let sum = box2.minkowski_sum(&CenteredBody::ball(2, 0.5));
        assert!(sum.contains_with(&DVector::from_vec(vec![1.4, 0.0]), 0.0, &cfg));
        assert!(!sum.contains_with(&DVector::from_vec(vec![1.6, 0.0]), 0.0, &cfg));
        // Corner: (1 + 0.5/sqrt2 - eps, same) inside, beyond outside.
        let c = 1.0 + 0.5 / 2f64.sqrt();
        assert!(sum.contains_with(&DVector::from_vec(vec![c - 1e-3, c - 1e-3]), 0.0, &cfg));
        assert!(!sum.contains_with(&DVector::from_vec(vec![c + 1e-2, c + 1e-2]), 0.0, &cfg));
    }

    #[test]
    fn hull_gauge_of_square() {
        let pts = vec![
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![-1.0, 1.0]),
            DVector::from_vec(vec![-1.0, -1.0]),
            DVector::from_vec(vec![1.0, -1.0]),
        ];
        let g = hull_gauge(&pts, &DVector::zeros(2), &DVector::from_vec(vec![0.5, 0.25])).unwrap();
        assert!((g - 0.5).abs() < 1e-7, "g={g}");
    }
}
