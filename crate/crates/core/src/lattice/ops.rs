//! Directional bases, index-3 adjunction, parity sublattices and coset
//! streams.
//!
//! The triangularizations run over arbitrary-precision integers on scaled
//! copies of the coefficient matrices, so commensurability is decided
//! exactly once inputs are recognized as rationals with a known index.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::basis::LatticeBasis;
use crate::config::EngineConfig;
use crate::error::{Error, Result};

/// Parity sublattice `{ y : <a, y> ≡ 0 mod p }` in the coefficient
/// coordinates of a reference basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SublatticeSpec {
    pub a: Vec<u64>,
    pub p: u64,
}

impl SublatticeSpec {
    pub fn new(a: Vec<u64>, p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("{p} is not prime"),
            });
        }
        if a.iter().all(|&v| v % p == 0) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: "zero vector mod p".into(),
            });
        }
        Ok(SublatticeSpec { a, p })
    }

    /// Closed-form directional basis of the parity sublattice with respect
    /// to `reference`: after normalizing the leading coefficient to one, the
    /// columns are `e_1, ..., e_{j-1}, p e_j, -a_{j+1} e_j + e_{j+1}, ...`.
    pub fn directional_basis(&self, reference: &LatticeBasis) -> Result<LatticeBasis> {
        let n = reference.dim();
        if self.a.len() != n {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("expected {n} coefficients"),
            });
        }
        let p = self.p;
        let j = self
            .a
            .iter()
            .position(|&v| v % p != 0)
            .expect("nonzero mod p by construction");
        let inv = mod_inverse(self.a[j] % p, p).expect("leading coefficient invertible");
        let norm: Vec<u64> = self.a.iter().map(|&v| v % p * inv % p).collect();
        let mut coeff = DMatrix::<f64>::zeros(n, n);
        for i in 0..j {
            coeff[(i, i)] = 1.0;
        }
        coeff[(j, j)] = p as f64;
        for i in (j + 1)..n {
            coeff[(j, i)] = -((norm[i] % p) as f64);
            coeff[(i, i)] = 1.0;
        }
        LatticeBasis::new(reference.columns() * coeff)
    }

    /// Membership of an integer coefficient vector.
    pub fn contains_coeffs(&self, coeffs: &[i64]) -> bool {
        let p = self.p as i64;
        let mut acc: i64 = 0;
        for (c, &a) in coeffs.iter().zip(&self.a) {
            acc = (acc + (c.rem_euclid(p)) * (a as i64 % p)) % p;
        }
        acc == 0
    }
}

/// Directional basis of the lattice spanned by `m_basis` with respect to
/// `reference`: the output spans the same lattice as `m_basis` and shares
/// all prefix spans (hence Gram-Schmidt projections) with `reference`.
///
/// `m_basis` must span a full-rank sublattice or superlattice of the
/// reference lattice.
pub fn directional_basis(
    m_basis: &LatticeBasis,
    reference: &LatticeBasis,
    cfg: &EngineConfig,
) -> Result<LatticeBasis> {
    let n = reference.dim();
    let h = m_basis.columns();
    let x = h
        .clone()
        .lu()
        .solve(reference.columns())
        .ok_or(Error::SingularBasis(0.0))?;
    // Scale X to integers: by 1 for superlattices, by the index for
    // sublattices.
    let ratio = m_basis.det_abs() / reference.det_abs();
    let scale = if ratio >= 1.0 - 1e-9 {
        let k = ratio.round();
        if (ratio - k).abs() > 1e-6 * k.max(1.0) {
            return Err(Error::NotCommensurable((ratio - k).abs()));
        }
        k.max(1.0)
    } else {
        1.0
    };
    let mut y = vec![vec![BigInt::zero(); n]; n];
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = x[(i, j)] * scale;
            let r = v.round();
            residual = residual.max((v - r).abs());
            y[i][j] = BigInt::from(r as i64);
        }
    }
    if residual > cfg.integrality_tol.max(1e-9) * scale.max(1.0) * 100.0 {
        return Err(Error::NotCommensurable(residual));
    }
    let u_inv = upper_triangularize(&mut y)?;
    let mut u_inv_f = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            u_inv_f[(i, j)] = u_inv[i][j]
                .to_f64()
                .ok_or(Error::NotCommensurable(f64::INFINITY))?;
        }
    }
    let out = LatticeBasis::new(h * u_inv_f)?;
    debug_assert!(
        (out.det_abs() - m_basis.det_abs()).abs() <= 1e-9 * m_basis.det_abs(),
        "directional basis must preserve the determinant"
    );
    Ok(out)
}

/// Adjoin an order-3 point: returns a directional basis of `Λ + Zc` with
/// determinant `det(Λ)/3`.
pub fn adjoin(basis: &LatticeBasis, c: &DVector<f64>, cfg: &EngineConfig) -> Result<LatticeBasis> {
    let n = basis.dim();
    let z3 = basis.coefficients(&(c * 3.0));
    let mut z3i = vec![BigInt::zero(); n];
    for i in 0..n {
        let r = z3[i].round();
        if (z3[i] - r).abs() > cfg.integrality_tol * 1e3 {
            return Err(Error::NotOrderThree);
        }
        z3i[i] = BigInt::from(r as i64);
    }
    let zc = basis.coefficients(c);
    if (0..n).all(|i| (zc[i] - zc[i].round()).abs() <= cfg.integrality_tol * 1e3) {
        return Err(Error::AlreadyMember);
    }
    // Coefficient lattice scaled by 3: columns 3 e_i plus z3.
    let mut gens = vec![vec![BigInt::zero(); n + 1]; n];
    for i in 0..n {
        gens[i][i] = BigInt::from(3);
        gens[i][n] = z3i[i].clone();
    }
    let t = column_hnf(&mut gens)?;
    let mut coeff = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            coeff[(i, j)] = t[i][j].to_f64().ok_or(Error::NotOrderThree)? / 3.0;
        }
    }
    let candidate = LatticeBasis::new(basis.columns() * coeff)?;
    let expected = basis.det_abs() / 3.0;
    if (candidate.det_abs() - expected).abs() > 1e-9 * expected {
        return Err(Error::NotOrderThree);
    }
    directional_basis(&candidate, basis, cfg)
}

/// Streaming coset representatives of `Λ/p mod Λ`: exactly `p^n` points
/// `B a / p` in lexicographic coefficient order with digits mapped to the
/// centered range (`{-1, 0, 1}` for `p = 3`), using constant memory.
pub fn mod_p_cosets(basis: &LatticeBasis, p: u64) -> CosetIter {
    CosetIter {
        basis: basis.clone(),
        p,
        digits: vec![0; basis.dim()],
        done: p < 2,
    }
}

pub struct CosetIter {
    basis: LatticeBasis,
    p: u64,
    digits: Vec<u64>,
    done: bool,
}

impl CosetIter {
    /// Centered digit: values up to `p/2` stay, the rest wrap negative.
    fn centered(&self, d: u64) -> f64 {
        if 2 * d <= self.p {
            d as f64
        } else {
            d as f64 - self.p as f64
        }
    }
}

impl Iterator for CosetIter {
    type Item = (Vec<u64>, DVector<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let digits = self.digits.clone();
        let coeff = DVector::from_fn(digits.len(), |i, _| self.centered(digits[i]));
        let point = self.basis.columns() * coeff / self.p as f64;
        // Lexicographic odometer.
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.p {
                break;
            }
            self.digits[i] = 0;
        }
        Some((digits, point))
    }
}

/// Unimodular row reduction to upper triangular form; returns `U^{-1}` for
/// the accumulated transform `U Y`.
fn upper_triangularize(y: &mut [Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
    let n = y.len();
    let mut u_inv: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        // Pivot into place.
        if y[col][col].is_zero() {
            let swap = (col + 1..n).find(|&i| !y[i][col].is_zero());
            match swap {
                Some(i) => {
                    y.swap(col, i);
                    // U^{-1} column swap.
                    for row in u_inv.iter_mut() {
                        row.swap(col, i);
                    }
                }
                None => return Err(Error::SingularBasis(0.0)),
            }
        }
        for i in col + 1..n {
            if y[i][col].is_zero() {
                continue;
            }
            let a = y[col][col].clone();
            let b = y[i][col].clone();
            let (g, s, t) = extended_gcd(&a, &b);
            let (aq, bq) = (&a / &g, &b / &g);
            for j in 0..n {
                let top = &s * &y[col][j] + &t * &y[i][j];
                let bot = -&bq * &y[col][j] + &aq * &y[i][j];
                y[col][j] = top;
                y[i][j] = bot;
            }
            // U^{-1} <- U^{-1} L^{-1}, a paired column update.
            for row in u_inv.iter_mut() {
                let cj = row[col].clone();
                let ci = row[i].clone();
                row[col] = &cj * &aq + &ci * &bq;
                row[i] = -&cj * &t + &ci * &s;
            }
        }
        if y[col][col].is_negative() {
            for j in 0..n {
                y[col][j] = -y[col][j].clone();
            }
            for row in u_inv.iter_mut() {
                row[col] = -row[col].clone();
            }
        }
    }
    Ok(u_inv)
}

/// Column-style Hermite reduction of an `n x m` generator matrix to its
/// first `n` columns (lower triangular).
fn column_hnf(g: &mut [Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
    let n = g.len();
    let m = g[0].len();
    for row in 0..n {
        if g[row][row].is_zero() {
            let swap = (row + 1..m).find(|&c| !g[row][c].is_zero());
            match swap {
                Some(c) => {
                    for r in g.iter_mut() {
                        r.swap(row, c);
                    }
                }
                None => return Err(Error::SingularBasis(0.0)),
            }
        }
        for c in row + 1..m {
            if g[row][c].is_zero() {
                continue;
            }
            let a = g[row][row].clone();
            let b = g[row][c].clone();
            let (gg, s, t) = extended_gcd(&a, &b);
            let (aq, bq) = (&a / &gg, &b / &gg);
            for r in g.iter_mut() {
                let first = &s * &r[row] + &t * &r[c];
                let second = -&bq * &r[row] + &aq * &r[c];
                r[row] = first;
                r[c] = second;
            }
        }
        if g[row][row].is_negative() {
            for r in g.iter_mut() {
                r[row] = -r[row].clone();
            }
        }
    }
    Ok(g.iter().map(|r| r[..n].to_vec()).collect())
}

/// Extended gcd: returns `(g, s, t)` with `s a + t b = g > 0`.
fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::from(1), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::from(1));
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r);
        let s = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime strictly between `n` and `2n` (Bertrand).
pub fn prime_in_bertrand_interval(n: u64) -> Option<u64> {
    ((n + 1)..(2 * n)).find(|&p| is_prime(p))
}

fn mod_inverse(a: u64, p: u64) -> Option<u64> {
    let (g, s, _) = extended_gcd(&BigInt::from(a), &BigInt::from(p));
    if g != BigInt::from(1) {
        return None;
    }
    let p_big = BigInt::from(p);
    let s = ((s % &p_big) + &p_big) % &p_big;
    s.to_u64()
}
