//! Lattice bases with cached Gram-Schmidt data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered basis `b_1 ... b_n` (matrix columns) with cached Gram-Schmidt
/// orthogonalization; immutable after construction.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    columns: DMatrix<f64>,
    /// Orthogonalized vectors `b*_i` as columns.
    gs: DMatrix<f64>,
    /// Squared norms of the `b*_i`.
    gs_norms_sq: Vec<f64>,
    det_abs: f64,
}

impl LatticeBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let n = columns.nrows();
        if columns.ncols() != n || n == 0 {
            return Err(Error::SingularBasis(0.0));
        }
        let mut gs = columns.clone();
        // Modified Gram-Schmidt.
        for i in 0..n {
            for j in 0..i {
                let bj = gs.column(j).into_owned();
                let nj = bj.norm_squared();
                if nj > 0.0 {
                    let mu = gs.column(i).dot(&bj) / nj;
                    let update = &bj * mu;
                    let mut col = gs.column_mut(i);
                    col -= update;
                }
            }
        }
        let gs_norms_sq: Vec<f64> = (0..n).map(|i| gs.column(i).norm_squared()).collect();
        let scale = columns.amax();
        let min_norm = gs_norms_sq.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min_norm.sqrt() <= 1e-12 * scale.max(1.0) {
            return Err(Error::SingularBasis(min_norm.sqrt()));
        }
        let det_abs: f64 = gs_norms_sq.iter().map(|v| v.sqrt()).product();
        Ok(LatticeBasis {
            columns,
            gs,
            gs_norms_sq,
            det_abs,
        })
    }

    pub fn identity(n: usize) -> Self {
        LatticeBasis::new(DMatrix::identity(n, n)).expect("identity is nonsingular")
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    /// `|det B|`; equals the product of Gram-Schmidt norms.
    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    /// Orthogonalized vector `b*_i`.
    pub fn gram_schmidt_column(&self, i: usize) -> DVector<f64> {
        self.gs.column(i).into_owned()
    }

    pub fn gram_schmidt_norm_sq(&self, i: usize) -> f64 {
        self.gs_norms_sq[i]
    }

    /// The lattice point with the given integer coefficients.
    pub fn point(&self, coeffs: &[i64]) -> DVector<f64> {
        &self.columns * DVector::from_fn(coeffs.len(), |i, _| coeffs[i] as f64)
    }

    /// Coefficients of an arbitrary point (exact solve, not rounded).
    pub fn coefficients(&self, x: &DVector<f64>) -> DVector<f64> {
        self.columns
            .clone()
            .lu()
            .solve(x)
            .expect("basis is nonsingular")
    }

    /// Scaled basis `s B`.
    pub fn scale(&self, s: f64) -> LatticeBasis {
        LatticeBasis::new(&self.columns * s).expect("scaling preserves nonsingularity")
    }

    /// Column-major JSON form; accepts exact decimal strings on input.
    pub fn to_json(&self) -> BasisJson {
        BasisJson {
            basis: (0..self.dim())
                .map(|j| self.columns.column(j).iter().copied().collect())
                .collect(),
        }
    }
}

/// Serde carrier for the basis JSON schema `{"basis": [[...]]}` with columns
/// as the outer list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisJson {
    #[serde(deserialize_with = "deser_columns")]
    pub basis: Vec<Vec<f64>>,
}

impl BasisJson {
    pub fn to_basis(&self) -> Result<LatticeBasis> {
        let n = self.basis.len();
        if n == 0 || self.basis.iter().any(|c| c.len() != n) {
            return Err(Error::BadDescriptor("basis: expected square column list".into()));
        }
        let mut m = DMatrix::zeros(n, n);
        for (j, col) in self.basis.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        LatticeBasis::new(m)
    }
}

fn deser_columns<'de, D>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Num(f64),
        Str(String),
    }
    let raw: Vec<Vec<Cell>> = Vec::deserialize(d)?;
    raw.into_iter()
        .map(|col| {
            col.into_iter()
                .map(|c| match c {
                    Cell::Num(v) => Ok(v),
                    Cell::Str(s) => s
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| serde::de::Error::custom(format!("basis: {e}"))),
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_matches_gram_schmidt_product() {
        let b = LatticeBasis::new(DMatrix::from_column_slice(
            2,
            2,
            &[3.0, 1.0, 1.0, 2.0],
        ))
        .unwrap();
        let lu_det = DMatrix::<f64>::from_column_slice(2, 2, &[3.0, 1.0, 1.0, 2.0])
            .determinant()
            .abs();
        assert!((b.det_abs() - lu_det).abs() <= 1e-9 * lu_det);
    }

    #[test]
    fn basis_json_accepts_decimal_strings() {
        let text = r#"{"basis": [["1.0", 0.0], [0, "0.5"]]}"#;
        let parsed: BasisJson = serde_json::from_str(text).unwrap();
        let b = parsed.to_basis().unwrap();
        assert!((b.det_abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        let m = DMatrix::from_column_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        assert!(matches!(LatticeBasis::new(m), Err(Error::SingularBasis(_))));
    }
}
