//! Body descriptors: a JSON-serializable algebra that compiles to
//! `CenteredBody` oracles with certified sandwiching data.
//!
//! Matrices are row-major. `p` accepts a number or the string "inf".

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::body::{kb_body, CenteredBody};
use super::constraint::Constraint;
use crate::config::EngineConfig;
use crate::convexopt::simplex::{solve_lp, LpOutcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyDescriptor {
    /// `{ x : A x <= b }`, bounded with nonempty interior.
    Hpolytope { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// `{ x : (x - t)^T A (x - t) <= 1 }` with `A` positive definite.
    Ellipsoid { a: Vec<Vec<f64>>, t: Vec<f64> },
    /// lp ball of the given radius about the origin.
    Lpball { p: PExponent, radius: f64, dim: usize },
    Scale { s: f64, inner: Box<BodyDescriptor> },
    Translate { t: Vec<f64>, inner: Box<BodyDescriptor> },
    Intersect { left: Box<BodyDescriptor>, right: Box<BodyDescriptor> },
    /// Kovner-Besicovitch symmetrization `(K - c) ∩ (c - K)` about `c ∈ K`.
    Kbsym { c: Vec<f64>, inner: Box<BodyDescriptor> },
    /// Image `M K` of a nonsingular matrix.
    Affine { m: Vec<Vec<f64>>, inner: Box<BodyDescriptor> },
}

/// Exponent of an lp ball; `"inf"` is accepted in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(pub f64);

impl Serialize for PExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PExponent(v)),
            Raw::Str(s) if s == "inf" => Ok(PExponent(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "bad p exponent {s:?}; expected a number or \"inf\""
            ))),
        }
    }
}

impl BodyDescriptor {
    /// Parse a descriptor from JSON, honoring an optional `"schema"` field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::BadDescriptor(format!("json: {e}")))?;
        if let Some(schema) = value.get("schema") {
            if schema != "thinlat/1" {
                return Err(Error::BadDescriptor(format!(
                    "schema: expected \"thinlat/1\", found {schema}"
                )));
            }
        }
        serde_json::from_value(value).map_err(|e| Error::BadDescriptor(format!("{e}")))
    }

    pub fn dim(&self) -> usize {
        match self {
            BodyDescriptor::Hpolytope { a, .. } => a.first().map_or(0, |r| r.len()),
            BodyDescriptor::Ellipsoid { t, .. } => t.len(),
            BodyDescriptor::Lpball { dim, .. } => *dim,
            BodyDescriptor::Scale { inner, .. } => inner.dim(),
            BodyDescriptor::Translate { inner, .. } => inner.dim(),
            BodyDescriptor::Intersect { left, .. } => left.dim(),
            BodyDescriptor::Kbsym { inner, .. } => inner.dim(),
            BodyDescriptor::Affine { inner, .. } => inner.dim(),
        }
    }
}

/// Compile a descriptor to a membership body with valid sandwiching data.
pub fn compile(descriptor: &BodyDescriptor, cfg: &EngineConfig) -> Result<CenteredBody> {
    match descriptor {
        BodyDescriptor::Hpolytope { a, b } => compile_polytope(a, b),
        BodyDescriptor::Ellipsoid { a, t } => compile_ellipsoid(a, t),
        BodyDescriptor::Lpball { p, radius, dim } => compile_lpball(p.0, *radius, *dim),
        BodyDescriptor::Scale { s, inner } => {
            if !(*s > 0.0 && s.is_finite()) {
                return Err(Error::BadDescriptor(format!("s: must be positive, got {s}")));
            }
            Ok(compile(inner, cfg)?.scale(*s))
        }
        BodyDescriptor::Translate { t, inner } => {
            let body = compile(inner, cfg)?;
            if t.len() != body.dim {
                return Err(Error::BadDescriptor("t: dimension mismatch".into()));
            }
            Ok(body.translate(&DVector::from_vec(t.clone())))
        }
        BodyDescriptor::Intersect { left, right } => {
            let l = compile(left, cfg)?;
            let r = compile(right, cfg)?;
            if l.dim != r.dim {
                return Err(Error::BadDescriptor("right: dimension mismatch".into()));
            }
            l.intersect(&r)
        }
        BodyDescriptor::Kbsym { c, inner } => {
            let body = compile(inner, cfg)?;
            if c.len() != body.dim {
                return Err(Error::BadDescriptor("c: dimension mismatch".into()));
            }
            kb_body(&body, &DVector::from_vec(c.clone()), cfg)
        }
        BodyDescriptor::Affine { m, inner } => {
            let body = compile(inner, cfg)?;
            let mat = matrix_from_rows(m, body.dim, "m")?;
            body.affine_image(&mat)
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], expect_cols: usize, key: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::BadDescriptor(format!("{key}: empty matrix")));
    }
    let cols = rows[0].len();
    if cols != expect_cols {
        return Err(Error::BadDescriptor(format!(
            "{key}: expected {expect_cols} columns, found {cols}"
        )));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::BadDescriptor(format!("{key}: ragged rows")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

fn compile_polytope(a_rows: &[Vec<f64>], b: &[f64]) -> Result<CenteredBody> {
    if a_rows.is_empty() {
        return Err(Error::BadDescriptor("a: empty constraint matrix".into()));
    }
    let n = a_rows[0].len();
    let m = a_rows.len();
    if b.len() != m {
        return Err(Error::BadDescriptor(format!(
            "b: expected {m} entries, found {}",
            b.len()
        )));
    }
    let a = matrix_from_rows(a_rows, n, "a")?;
    let bv = DVector::from_vec(b.to_vec());

    // Boundedness via coordinate LPs; also yields a bounding box.
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for j in 0..n {
        let mut c = DVector::zeros(n);
        c[j] = 1.0;
        match solve_lp(&c, &a, &bv) {
            LpOutcome::Optimal { value, .. } => hi[j] = value,
            LpOutcome::Unbounded => return Err(Error::UnboundedBody(j)),
            LpOutcome::Infeasible => return Err(Error::EmptyInterior(0.0)),
        }
        c[j] = -1.0;
        match solve_lp(&c, &a, &bv) {
            LpOutcome::Optimal { value, .. } => lo[j] = -value,
            LpOutcome::Unbounded => return Err(Error::UnboundedBody(j)),
            LpOutcome::Infeasible => return Err(Error::EmptyInterior(0.0)),
        }
    }

    // Chebyshev center: maximize rho s.t. a_i . x + |a_i| rho <= b_i.
    let mut cheb_a = DMatrix::zeros(m, n + 1);
    for i in 0..m {
        let mut norm = 0.0;
        for j in 0..n {
            cheb_a[(i, j)] = a[(i, j)];
            norm += a[(i, j)] * a[(i, j)];
        }
        cheb_a[(i, n)] = norm.sqrt();
    }
    let mut obj = DVector::zeros(n + 1);
    obj[n] = 1.0;
    let (center, inner) = match solve_lp(&obj, &cheb_a, &bv) {
        LpOutcome::Optimal { x, value } => {
            (DVector::from_fn(n, |j, _| x[j]), value)
        }
        LpOutcome::Unbounded => {
            // rho unbounded cannot happen for a bounded polytope.
            return Err(Error::BadDescriptor("a: inconsistent bounds".into()));
        }
        LpOutcome::Infeasible => return Err(Error::EmptyInterior(0.0)),
    };
    if inner <= 1e-12 {
        return Err(Error::EmptyInterior(inner));
    }
    // Conservative outer radius from the bounding box.
    let outer = (0..n)
        .map(|j| (hi[j] - center[j]).abs().max((lo[j] - center[j]).abs()).powi(2))
        .sum::<f64>()
        .sqrt();

    let constraints: Vec<Constraint> = (0..m)
        .map(|i| Constraint::Linear {
            a: DVector::from_fn(n, |j, _| a[(i, j)]),
            b: bv[i],
        })
        .collect();
    let symmetric = polytope_is_symmetric(&constraints, &center);
    Ok(CenteredBody::from_constraints(
        constraints,
        center,
        inner,
        outer,
        symmetric,
    ))
}

/// Certify `-K = K` about the center by pairing up normalized facets.
fn polytope_is_symmetric(cons: &[Constraint], center: &DVector<f64>) -> bool {
    let mut normals = Vec::new();
    for c in cons {
        let Constraint::Linear { a, b } = c else { return false };
        let slack = b - a.dot(center);
        if slack <= 0.0 {
            return false;
        }
        normals.push(a / slack);
    }
    let close = |u: &DVector<f64>, v: &DVector<f64>| (u + v).amax() <= 1e-9 * (1.0 + u.amax());
    normals.iter().all(|u| normals.iter().any(|v| close(u, v)))
}

fn compile_ellipsoid(a_rows: &[Vec<f64>], t: &[f64]) -> Result<CenteredBody> {
    let n = t.len();
    let a = matrix_from_rows(a_rows, n, "a")?;
    if a.nrows() != n {
        return Err(Error::BadDescriptor(format!(
            "a: expected {n}x{n} matrix, found {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if (&a - a.transpose()).amax() > 1e-9 * (1.0 + a.amax()) {
        return Err(Error::BadDescriptor("a: not symmetric".into()));
    }
    let sym = (&a + a.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let lmin = eig.eigenvalues.min();
    let lmax = eig.eigenvalues.max();
    if lmin <= 0.0 {
        return Err(Error::BadDescriptor("a: not positive definite".into()));
    }
    let tv = DVector::from_vec(t.to_vec());
    Ok(CenteredBody::from_constraints(
        vec![Constraint::Quadratic { q: sym, t: tv.clone() }],
        tv,
        1.0 / lmax.sqrt(),
        1.0 / lmin.sqrt(),
        true,
    ))
}

fn compile_lpball(p: f64, radius: f64, n: usize) -> Result<CenteredBody> {
    if !(p >= 1.0) {
        return Err(Error::BadDescriptor(format!("p: must be >= 1, got {p}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::BadDescriptor(format!("radius: must be positive, got {radius}")));
    }
    if n == 0 {
        return Err(Error::BadDescriptor("dim: must be positive".into()));
    }
    let nf = n as f64;
    let (inner, outer) = if p <= 2.0 {
        (radius * nf.powf(0.5 - 1.0 / p), radius)
    } else {
        (radius, radius * nf.powf(0.5 - 1.0 / p))
    };
    let constraints = if p.is_infinite() {
        // Box: 2n facets, kept linear for exact enumeration paths.
        let mut cons = Vec::with_capacity(2 * n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            cons.push(Constraint::Linear { a: e.clone(), b: radius });
            cons.push(Constraint::Linear { a: -e, b: radius });
        }
        cons
    } else if (p - 1.0).abs() < 1e-12 && n <= 8 {
        // Cross-polytope: sign-pattern facets.
        let mut cons = Vec::with_capacity(1 << n);
        for mask in 0u32..(1 << n) {
            let a = DVector::from_fn(n, |j, _| if mask >> j & 1 == 1 { 1.0 } else { -1.0 });
            cons.push(Constraint::Linear { a, b: radius });
        }
        cons
    } else if (p - 2.0).abs() < 1e-12 {
        vec![Constraint::Quadratic {
            q: DMatrix::identity(n, n) / (radius * radius),
            t: DVector::zeros(n),
        }]
    } else {
        vec![Constraint::PNorm {
            d: DMatrix::identity(n, n) / radius,
            t: DVector::zeros(n),
            p,
        }]
    };
    Ok(CenteredBody::from_constraints(
        constraints,
        DVector::zeros(n),
        inner,
        outer,
        true,
    ))
}
