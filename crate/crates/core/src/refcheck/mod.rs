//! Independent brute-force oracles that ground the derived expected values:
//! exact 2-D polygon geometry, grid covering numbers, grid KB optimization
//! and coefficient-box lattice scans.
//!
//! Nothing here may share code with the main pipeline; these functions are
//! the other side of every dual-route check. Exact oracles are restricted to
//! low dimension and make no effort to be fast.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::CenteredBody;

pub mod rng;

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone)]
pub struct Polygon2D {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon2D {
    /// Validates simplicity, convexity and counterclockwise orientation.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon("fewer than three vertices".into()));
        }
        let n = vertices.len();
        let mut area2 = 0.0;
        for i in 0..n {
            let [x1, y1] = vertices[i];
            let [x2, y2] = vertices[(i + 1) % n];
            area2 += x1 * y2 - x2 * y1;
        }
        if area2 <= 1e-14 {
            return Err(Error::DegeneratePolygon(format!(
                "not counterclockwise or zero area ({})",
                area2 / 2.0
            )));
        }
        let scale = vertices
            .iter()
            .map(|v| v[0].abs().max(v[1].abs()))
            .fold(1.0f64, f64::max);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross < -1e-12 * scale * scale {
                return Err(Error::DegeneratePolygon(format!(
                    "concave corner at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(Polygon2D { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        for i in 0..n {
            let [x1, y1] = self.vertices[i];
            let [x2, y2] = self.vertices[(i + 1) % n];
            let w = x1 * y2 - x2 * y1;
            a += w;
            cx += (x1 + x2) * w;
            cy += (y1 + y2) * w;
        }
        [cx / (3.0 * a), cy / (3.0 * a)]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            if cross < -1e-12 {
                return false;
            }
        }
        true
    }

    pub fn translate(&self, t: [f64; 2]) -> Polygon2D {
        Polygon2D {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] + t[0], v[1] + t[1]])
                .collect(),
        }
    }

    pub fn reflect(&self) -> Polygon2D {
        // Point reflection is a rotation; orientation is preserved.
        Polygon2D {
            vertices: self.vertices.iter().map(|v| [-v[0], -v[1]]).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Polygon2D {
        Polygon2D {
            vertices: self.vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect(),
        }
    }

    /// Distance from the origin to the nearest edge line; the polygon must
    /// contain the origin strictly.
    pub fn inradius_about_origin(&self) -> f64 {
        let n = self.vertices.len();
        let mut r = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let ex = b[0] - a[0];
            let ey = b[1] - a[1];
            let len = (ex * ex + ey * ey).sqrt();
            // Outward normal of a ccw edge is (ey, -ex).
            let d = (a[0] * ey - a[1] * ex) / len;
            r = r.min(d);
        }
        r
    }

    /// Gauge of the polygon about the origin via exact ray-edge
    /// intersection.
    pub fn ray_gauge(&self, p: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        let mut g: f64 = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let ex = b[0] - a[0];
            let ey = b[1] - a[1];
            let num = p[0] * ey - p[1] * ex;
            let den = a[0] * ey - a[1] * ex;
            if den > 1e-14 {
                g = g.max(num / den);
            }
        }
        g.max(0.0)
    }

    pub fn support(&self, d: [f64; 2]) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0] * d[0] + v[1] * d[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Outward halfplane rows `(a, b)` with `a . x <= b` describing the
    /// polygon.
    pub fn halfplanes(&self) -> Vec<([f64; 2], f64)> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let normal = [b[1] - a[1], a[0] - b[0]];
                let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
                let nn = [normal[0] / len, normal[1] / len];
                (nn, nn[0] * a[0] + nn[1] * a[1])
            })
            .collect()
    }
}

/// Shoelace area.
pub fn exact_area(p: &Polygon2D) -> f64 {
    let n = p.vertices.len();
    let mut a2 = 0.0;
    for i in 0..n {
        let [x1, y1] = p.vertices[i];
        let [x2, y2] = p.vertices[(i + 1) % n];
        a2 += x1 * y2 - x2 * y1;
    }
    a2 / 2.0
}

/// Sutherland-Hodgman intersection of two convex polygons. Returns `None`
/// when the intersection has empty interior.
pub fn clip(subject: &Polygon2D, clip_by: &Polygon2D) -> Option<Polygon2D> {
    let mut out: Vec<[f64; 2]> = subject.vertices.clone();
    let m = clip_by.vertices.len();
    for i in 0..m {
        if out.len() < 3 {
            return None;
        }
        let a = clip_by.vertices[i];
        let b = clip_by.vertices[(i + 1) % m];
        let input = std::mem::take(&mut out);
        let n = input.len();
        for j in 0..n {
            let s = input[j];
            let e = input[(j + 1) % n];
            let sc = (b[0] - a[0]) * (s[1] - a[1]) - (b[1] - a[1]) * (s[0] - a[0]);
            let ec = (b[0] - a[0]) * (e[1] - a[1]) - (b[1] - a[1]) * (e[0] - a[0]);
            let s_in = sc >= 0.0;
            let e_in = ec >= 0.0;
            if s_in != e_in {
                let t = sc / (sc - ec);
                out.push([s[0] + (e[0] - s[0]) * t, s[1] + (e[1] - s[1]) * t]);
            }
            if e_in {
                out.push(e);
            }
        }
    }
    if out.len() < 3 {
        return None;
    }
    let poly = Polygon2D { vertices: out };
    if exact_area(&poly) <= 1e-14 {
        None
    } else {
        Some(poly)
    }
}

/// Minkowski sum of convex polygons by merging edge vectors by angle.
pub fn minkowski_sum(p: &Polygon2D, q: &Polygon2D) -> Polygon2D {
    let start = |poly: &Polygon2D| {
        let mut idx = 0;
        for (i, v) in poly.vertices.iter().enumerate() {
            let b = poly.vertices[idx];
            if (v[1], v[0]) < (b[1], b[0]) {
                idx = i;
            }
        }
        idx
    };
    let (pi0, qi0) = (start(p), start(q));
    let (np, nq) = (p.vertices.len(), q.vertices.len());
    let edge = |poly: &Polygon2D, base: usize, i: usize| {
        let a = poly.vertices[(base + i) % poly.vertices.len()];
        let b = poly.vertices[(base + i + 1) % poly.vertices.len()];
        [b[0] - a[0], b[1] - a[1]]
    };
    let mut verts = Vec::with_capacity(np + nq);
    let mut cur = [
        p.vertices[pi0][0] + q.vertices[qi0][0],
        p.vertices[pi0][1] + q.vertices[qi0][1],
    ];
    let (mut i, mut j) = (0usize, 0usize);
    while i < np || j < nq {
        verts.push(cur);
        let take_p = if i >= np {
            false
        } else if j >= nq {
            true
        } else {
            let e1 = edge(p, pi0, i);
            let e2 = edge(q, qi0, j);
            let cross = e1[0] * e2[1] - e1[1] * e2[0];
            cross >= 0.0
        };
        let e = if take_p {
            let e = edge(p, pi0, i);
            i += 1;
            e
        } else {
            let e = edge(q, qi0, j);
            j += 1;
            e
        };
        cur = [cur[0] + e[0], cur[1] + e[1]];
    }
    Polygon2D { vertices: verts }
}

/// Convex hull of a 2-D point set (monotone chain), counterclockwise.
pub fn convex_hull(points: &[[f64; 2]]) -> Result<Polygon2D> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return Err(Error::DegeneratePolygon("hull of fewer than 3 points".into()));
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
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
    Polygon2D::new(lower)
}

/// Greedy grid covering number: `(upper, lower)` bounds for `N(C, K)` with
/// `K` symmetric about the origin. The lower bound is the volume ratio
/// `vol(C - K) / vol(K - K)`.
pub fn brute_covering_number(
    c: &Polygon2D,
    k: &Polygon2D,
    grid_step: f64,
) -> Result<(u64, u64)> {
    let r = k.inradius_about_origin();
    if !(grid_step > 0.0) || grid_step > r / 4.0 + 1e-12 {
        return Err(Error::GridTooCoarse(grid_step));
    }
    // Samples: grid points of C.
    let (lo, hi) = c.bounding_box();
    let mut samples = Vec::new();
    let nx = ((hi[0] - lo[0]) / grid_step).ceil() as i64;
    let ny = ((hi[1] - lo[1]) / grid_step).ceil() as i64;
    for iy in 0..=ny {
        for ix in 0..=nx {
            let p = [lo[0] + ix as f64 * grid_step, lo[1] + iy as f64 * grid_step];
            if c.contains(p) {
                samples.push(p);
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::GridTooCoarse(grid_step));
    }
    let mut candidates = samples.clone();
    candidates.push(c.centroid());
    let covers = |center: [f64; 2], p: [f64; 2]| {
        k.ray_gauge([p[0] - center[0], p[1] - center[1]]) <= 1.0 + 1e-12
    };
    let mut covered = vec![false; samples.len()];
    let mut upper = 0u64;
    while covered.iter().any(|&c| !c) {
        // Greedy cover: the candidate covering the most uncovered samples.
        let mut best = (0usize, 0usize);
        for (ci, &cand) in candidates.iter().enumerate() {
            let count = samples
                .iter()
                .zip(&covered)
                .filter(|(s, &cov)| !cov && covers(cand, **s))
                .count();
            if count > best.1 {
                best = (ci, count);
            }
        }
        if best.1 == 0 {
            return Err(Error::GridTooCoarse(grid_step));
        }
        let cand = candidates[best.0];
        for (s, cov) in samples.iter().zip(covered.iter_mut()) {
            if covers(cand, *s) {
                *cov = true;
            }
        }
        upper += 1;
    }
    let c_minus_k = minkowski_sum(c, &k.reflect());
    let k_minus_k = minkowski_sum(k, &k.reflect());
    let lower = (exact_area(&c_minus_k) / exact_area(&k_minus_k)).ceil().max(1.0) as u64;
    Ok((upper, lower))
}

/// Grid argmax of the Kovner-Besicovitch value `area(K[c]) / area(K)`.
pub fn brute_kb(k: &Polygon2D, grid_step: f64) -> Result<([f64; 2], f64)> {
    if !(grid_step > 0.0) {
        return Err(Error::GridTooCoarse(grid_step));
    }
    let area = exact_area(k);
    let (lo, hi) = k.bounding_box();
    let mut best = (k.centroid(), 0.0f64);
    let nx = ((hi[0] - lo[0]) / grid_step).ceil() as i64;
    let ny = ((hi[1] - lo[1]) / grid_step).ceil() as i64;
    for iy in 0..=ny {
        for ix in 0..=nx {
            let c = [lo[0] + ix as f64 * grid_step, lo[1] + iy as f64 * grid_step];
            if !k.contains(c) {
                continue;
            }
            let v = kb_value(k, c);
            if v > best.1 {
                best = (c, v);
            }
        }
    }
    // Refine around the centroid too; it guarantees at least 2^-n.
    let centroid_v = kb_value(k, k.centroid());
    if centroid_v > best.1 {
        best = (k.centroid(), centroid_v);
    }
    let _ = area;
    Ok(best)
}

/// KB value of one center by polygon clipping.
pub fn kb_value(k: &Polygon2D, c: [f64; 2]) -> f64 {
    let shifted = k.translate([-c[0], -c[1]]);
    let reflected = shifted.reflect();
    match clip(&shifted, &reflected) {
        Some(p) => exact_area(&p) / exact_area(k),
        None => 0.0,
    }
}

/// Exhaustive lattice-point scan over the coefficient bounding box; the
/// ground truth for enumeration. Returns coefficient vectors and points of
/// all lattice points inside the body (closed membership).
pub fn coeff_box_scan(
    body: &CenteredBody,
    basis_columns: &DMatrix<f64>,
) -> Result<Vec<(Vec<i64>, DVector<f64>)>> {
    let n = body.dim;
    let inv = basis_columns
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBasis(0.0))?;
    let c0 = &inv * &body.center;
    let mut ranges = Vec::with_capacity(n);
    let mut total: f64 = 1.0;
    for i in 0..n {
        let row_norm = inv.row(i).norm();
        let half = row_norm * body.outer_radius + 1e-9;
        let lo = (c0[i] - half).floor() as i64;
        let hi = (c0[i] + half).ceil() as i64;
        total *= (hi - lo + 1) as f64;
        ranges.push((lo, hi));
    }
    if total > 5e7 {
        return Err(Error::BudgetExceeded(total as u64));
    }
    let mut out = Vec::new();
    let mut coeffs = vec![0i64; n];
    scan_rec(body, basis_columns, &ranges, 0, &mut coeffs, &mut out);
    Ok(out)
}

fn scan_rec(
    body: &CenteredBody,
    basis: &DMatrix<f64>,
    ranges: &[(i64, i64)],
    level: usize,
    coeffs: &mut Vec<i64>,
    out: &mut Vec<(Vec<i64>, DVector<f64>)>,
) {
    if level == ranges.len() {
        let point = basis * DVector::from_fn(coeffs.len(), |i, _| coeffs[i] as f64);
        if body.contains(&point) {
            out.push((coeffs.clone(), point));
        }
        return;
    }
    for c in ranges[level].0..=ranges[level].1 {
        coeffs[level] = c;
        scan_rec(body, basis, ranges, level + 1, coeffs, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon2D {
        Polygon2D::new(vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]).unwrap()
    }

    #[test]
    fn shoelace_known_areas() {
        assert!((exact_area(&unit_square()) - 4.0).abs() < 1e-12);
        let tri = Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((exact_area(&tri) - 0.5).abs() < 1e-12);
        // Regular hexagon of circumradius 1: area 3 sqrt(3) / 2.
        let hexagon = Polygon2D::new(
            (0..6)
                .map(|i| {
                    let a = std::f64::consts::PI / 3.0 * i as f64;
                    [a.cos(), a.sin()]
                })
                .collect(),
        )
        .unwrap();
        assert!((exact_area(&hexagon) - 1.5 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clip_self_and_disjoint() {
        let s = unit_square();
        let same = clip(&s, &s).unwrap();
        assert!((exact_area(&same) - 4.0).abs() < 1e-12);
        let far = s.translate([10.0, 0.0]);
        assert!(clip(&s, &far).is_none());
        // Half-shifted unit squares overlap in area 1*2 = 2 for shift (1,0).
        let shifted = s.translate([1.0, 0.0]);
        let overlap = clip(&s, &shifted).unwrap();
        assert!((exact_area(&overlap) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn minkowski_sum_of_squares() {
        let s = unit_square();
        let sum = minkowski_sum(&s, &s);
        assert!((exact_area(&sum) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn covering_bounds_order() {
        let s = unit_square();
        let double = s.scale(2.0);
        let (upper, lower) = brute_covering_number(&double, &s, 0.2).unwrap();
        assert!(upper >= lower);
        assert!(upper <= 4, "upper={upper}");
        let (u1, l1) = brute_covering_number(&s, &s, 0.2).unwrap();
        assert_eq!((u1, l1), (1, 1));
    }

    #[test]
    fn kb_of_triangle_at_centroid_is_two_thirds() {
        let tri = Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let v = kb_value(&tri, [1.0 / 3.0, 1.0 / 3.0]);
        assert!((v - 2.0 / 3.0).abs() < 1e-9, "v={v}");
    }

    #[test]
    fn ray_gauge_of_triangle() {
        // Triangle conv{(-1,-1),(2,-1),(-1,2)} contains the origin; along
        // (1,0) the boundary is the line x + y = 1, so the gauge of (1,0)
        // is 1.
        let tri = Polygon2D::new(vec![[-1.0, -1.0], [2.0, -1.0], [-1.0, 2.0]]).unwrap();
        assert!((tri.ray_gauge([1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((tri.ray_gauge([0.5, 0.0]) - 0.5).abs() < 1e-12);
    }
}
