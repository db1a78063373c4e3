//! The covering-lattice pipeline: M-lattice from an ellipsoid provider,
//! derandomized sparsification to a packing sublattice, greedy index-3
//! densification, and the final rescale that certifies the covering. Also
//! the epsilon-net generator driven by a certified covering lattice.

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{unit_ball_volume, EngineConfig};
use crate::convexopt::rounding::gls_round;
use crate::enumeration::{self, covering_radius_bracket, is_far, lambda1, EnumerationReport};
use crate::error::{Error, Result};
use crate::geometry::{kb_body, BodyDescriptor, CenteredBody};
use crate::lattice::{adjoin, mod_p_cosets, prime_in_bertrand_interval, LatticeBasis, SublatticeSpec};

/// One sublattice or superlattice step recorded by the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexStep {
    pub op: String,
    pub index: u64,
}

/// A lattice together with the certificates the pipeline produced for a
/// body: minimum-distance and covering-radius brackets, the index trace back
/// to the M-lattice, and thinness when a reference volume is known.
#[derive(Debug, Clone)]
pub struct CoveringLattice {
    pub basis: LatticeBasis,
    pub lambda1_bracket: (f64, f64),
    pub mu_bracket: (f64, f64),
    pub thinness: Option<f64>,
    pub index_trace: Vec<IndexStep>,
    pub provider: String,
    pub c0: f64,
    /// Final scale factor applied after densification.
    pub scale: f64,
    /// Descriptor of the covered body when one is available.
    pub body: Option<BodyDescriptor>,
}

impl CoveringLattice {
    /// Covering certificate: the upper end of the covering-radius bracket.
    pub fn is_certified_covering(&self) -> bool {
        self.mu_bracket.1 <= 1.0 + 1e-3
    }

    /// Wrap an externally supplied lattice the caller asserts to be
    /// covering; the brackets degenerate to the trivial certificate.
    pub fn assume_covering(basis: LatticeBasis) -> Self {
        CoveringLattice {
            basis,
            lambda1_bracket: (0.0, f64::INFINITY),
            mu_bracket: (0.0, 1.0),
            thinness: None,
            index_trace: Vec::new(),
            provider: "external".into(),
            c0: 0.0,
            scale: 1.0,
            body: None,
        }
    }

    /// Lattice for the `s`-scaled body: basis scales, brackets are gauge
    /// quantities and stay unchanged.
    pub fn scaled_with_body(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.basis = self.basis.scale(s);
        out.scale = self.scale * s;
        out
    }

    /// Rescaled lattice for the same body: brackets scale with the basis.
    pub fn rescaled_same_body(&self, s: f64) -> Self {
        CoveringLattice {
            basis: self.basis.scale(s),
            lambda1_bracket: (self.lambda1_bracket.0 * s, self.lambda1_bracket.1 * s),
            mu_bracket: (self.mu_bracket.0 * s, self.mu_bracket.1 * s),
            thinness: self.thinness.map(|t| t / s.powi(self.basis.dim() as i32)),
            index_trace: self.index_trace.clone(),
            provider: self.provider.clone(),
            c0: self.c0,
            scale: self.scale * s,
            body: self.body.clone(),
        }
    }

    /// Rescale so the certified covering-radius upper bound becomes exactly
    /// one: coarsens over-tight lattices and refines non-covering ones,
    /// without invalidating any certificate.
    pub fn normalized_to_certificate(&self) -> Self {
        let u = self.mu_bracket.1;
        if !(u > 0.0 && u.is_finite()) || u == 1.0 {
            return self.clone();
        }
        self.rescaled_same_body(1.0 / u)
    }
}

/// Serialized form of [`CoveringLattice`]; round-trips losslessly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringLatticeJson {
    pub schema: String,
    pub basis: Vec<Vec<f64>>,
    pub lambda1_bracket: (f64, f64),
    pub mu_bracket: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thinness: Option<f64>,
    pub index_trace: Vec<IndexStep>,
    pub provider: String,
    pub c0: f64,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyDescriptor>,
}

impl CoveringLattice {
    pub fn to_json(&self) -> CoveringLatticeJson {
        CoveringLatticeJson {
            schema: "thinlat/1".into(),
            basis: self.basis.to_json().basis,
            lambda1_bracket: self.lambda1_bracket,
            mu_bracket: self.mu_bracket,
            thinness: self.thinness,
            index_trace: self.index_trace.clone(),
            provider: self.provider.clone(),
            c0: self.c0,
            scale: self.scale,
            body: self.body.clone(),
        }
    }

    pub fn from_json(json: &CoveringLatticeJson) -> Result<Self> {
        let basis = crate::lattice::BasisJson {
            basis: json.basis.clone(),
        }
        .to_basis()?;
        Ok(CoveringLattice {
            basis,
            lambda1_bracket: json.lambda1_bracket,
            mu_bracket: json.mu_bracket,
            thinness: json.thinness,
            index_trace: json.index_trace.clone(),
            provider: json.provider.clone(),
            c0: json.c0,
            scale: json.scale,
            body: json.body.clone(),
        })
    }
}

/// Provider of the ellipsoid the M-lattice is built from. The contract is
/// `E(A) ⊆ K` for a symmetric body about the origin; covering-number quality
/// decides enumeration speed, not correctness.
pub trait EllipsoidProvider {
    fn id(&self) -> &'static str;
    fn ellipsoid(&self, body: &CenteredBody, cfg: &EngineConfig) -> Result<DMatrix<f64>>;
}

/// Default provider: deterministic ellipsoidal rounding.
pub struct GlsProvider;

impl EllipsoidProvider for GlsProvider {
    fn id(&self) -> &'static str {
        "gls"
    }
    fn ellipsoid(&self, body: &CenteredBody, cfg: &EngineConfig) -> Result<DMatrix<f64>> {
        let rounding = gls_round(body, cfg).map_err(|e| Error::ProviderFailure(e.to_string()))?;
        Ok(rounding.a)
    }
}

/// M-lattice for a symmetric body about the origin: basis aligned with the
/// provider's ellipsoid axes and scaled so
/// `det(Λ) = 2^{-(n+1)} c0^{-n} vol(E(A))`. Together with `E(A) ⊆ K` this
/// yields `2^{n+1} det(Λ) <= vol(K)` for any `c0 >= 1`.
pub fn m_lattice(
    body: &CenteredBody,
    provider: &dyn EllipsoidProvider,
    cfg: &EngineConfig,
) -> Result<LatticeBasis> {
    let n = body.dim;
    let a = provider.ellipsoid(body, cfg)?;
    let v_n = unit_ball_volume(n);
    let s = v_n.powf(1.0 / n as f64) / (2f64.powf(1.0 + 1.0 / n as f64) * cfg.c0);
    let a_inv_sqrt = crate::convexopt::rounding::spd_power(&a, -0.5);
    LatticeBasis::new(a_inv_sqrt * s)
}

/// Derandomized sparsifier: a sublattice `M ⊆ Λ` of prime index with
/// `M ∩ K = {0}`, found by choosing the parity vector one coordinate at a
/// time while keeping the set of points definitively in `M` empty.
pub fn packing_lattice(
    body: &CenteredBody,
    mlat: &LatticeBasis,
    cfg: &EngineConfig,
) -> Result<(LatticeBasis, SublatticeSpec)> {
    let n = body.dim;
    let inv = mlat
        .columns()
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBasis(0.0))?;
    // Coefficient coordinates: the lattice becomes Z^n.
    let coeff_body = body.affine_image(&inv)?;
    let z = LatticeBasis::identity(n);

    let mut nonzero = 0u64;
    let mut sink = |c: &[i64], _: &DVector<f64>| {
        if c.iter().any(|&v| v != 0) {
            nonzero += 1;
        }
        ControlFlow::Continue(())
    };
    enumeration::enumerate(&coeff_body, &z, cfg, &mut sink)?;
    if nonzero < 2 {
        return Err(Error::NoPrimeFound(nonzero));
    }
    let p = prime_in_bertrand_interval(nonzero).ok_or(Error::NoPrimeFound(nonzero))?;

    // Greedy choice of the parity vector via the conditional expectation
    // criterion: after fixing a prefix, no enumerated point may have its
    // tail divisible by p while the prefix inner product vanishes mod p.
    let mut a = Vec::with_capacity(n);
    for i in 1..=n {
        let mut accepted = None;
        'candidates: for cand in 0..p {
            let mut prefix = a.clone();
            prefix.push(cand);
            let mut blocked = false;
            let mut check = |c: &[i64], _: &DVector<f64>| {
                if c.iter().all(|&v| v == 0) {
                    return ControlFlow::Continue(());
                }
                let pi = p as i64;
                let tail_zero = c[i..].iter().all(|&v| v.rem_euclid(pi) == 0);
                if !tail_zero {
                    return ControlFlow::Continue(());
                }
                let mut acc = 0i64;
                for (cv, av) in c[..i].iter().zip(&prefix) {
                    acc = (acc + cv.rem_euclid(pi) * (*av as i64)) % pi;
                }
                if acc == 0 {
                    blocked = true;
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            };
            enumeration::enumerate(&coeff_body, &z, cfg, &mut check)?;
            if !blocked {
                accepted = Some(cand);
                break 'candidates;
            }
        }
        match accepted {
            Some(cand) => a.push(cand),
            None => return Err(Error::GreedyStuck(i)),
        }
    }

    let spec = SublatticeSpec::new(a, p)?;
    let m = spec.directional_basis(mlat)?;
    Ok((m, spec))
}

/// Rogers densification: adjoin index-3 cosets that are farther than the
/// minimum distance until none remains; the minimum distance is preserved
/// and the covering radius drops to at most `3λ/2`.
pub fn rogers_densify(
    body: &CenteredBody,
    m: &LatticeBasis,
    lambda: f64,
    cfg: &EngineConfig,
) -> Result<(LatticeBasis, u64)> {
    let n = body.dim;
    let cap = (n as f64 * (4.0 * cfg.c0).ln() / 3f64.ln()).ceil() as u64 + 8;
    let mut current = m.clone();
    let mut adjoins = 0u64;
    let test_radius = lambda * (1.0 + cfg.densify_margin);
    'restart: loop {
        for (digits, rep) in mod_p_cosets(&current, 3) {
            if digits.iter().all(|&d| d == 0) {
                continue;
            }
            if is_far(body, &current, &rep, test_radius, cfg)? {
                current = adjoin(&current, &rep, cfg)?;
                adjoins += 1;
                if adjoins > cap {
                    return Err(Error::IterationOverflow(cap));
                }
                continue 'restart;
            }
        }
        break;
    }
    Ok((current, adjoins))
}

/// Full symmetric pipeline: M-lattice, sparsifier, densification, rescale by
/// `2/(3λ)`, then certification of the result.
pub fn thin_lattice_symmetric(
    body: &CenteredBody,
    provider: &dyn EllipsoidProvider,
    cfg: &EngineConfig,
) -> Result<CoveringLattice> {
    if !body.symmetric {
        return Err(Error::InvalidParameter {
            name: "body",
            reason: "symmetric pipeline requires a certified symmetric body".into(),
        });
    }
    let centered = if body.center.amax() > 0.0 {
        body.translate(&(-&body.center))
    } else {
        body.clone()
    };
    let mlat = m_lattice(&centered, provider, cfg)?;
    let (m, spec) = packing_lattice(&centered, &mlat, cfg)?;
    let lambda = adaptive_lambda1(&centered, &m, cfg)?;
    let (dense, adjoins) = rogers_densify(&centered, &m, lambda.0, cfg)?;
    let scale = 2.0 / (3.0 * lambda.0);
    let final_basis = dense.scale(scale);

    // Certificates on the final lattice.
    let (lam_fin, _) = lambda1(&centered, &final_basis, 0.8, cfg)
        .or_else(|_| lambda1(&centered, &final_basis, 1.6, cfg))?;
    let mu = covering_radius_bracket(&centered, &final_basis, 3, cfg)?;
    let mut trace = vec![IndexStep {
        op: "sparsify".into(),
        index: spec.p,
    }];
    for _ in 0..adjoins {
        trace.push(IndexStep {
            op: "densify".into(),
            index: 3,
        });
    }
    Ok(CoveringLattice {
        basis: final_basis,
        lambda1_bracket: (lam_fin * (1.0 - 1e-6), lam_fin * (1.0 + 1e-6)),
        mu_bracket: mu,
        thinness: None,
        index_trace: trace,
        provider: provider.id().into(),
        c0: cfg.c0,
        scale,
        body: None,
    })
}

/// Minimum distance with an adaptive search radius starting at the
/// configured constant.
fn adaptive_lambda1(
    body: &CenteredBody,
    basis: &LatticeBasis,
    cfg: &EngineConfig,
) -> Result<(f64, DVector<f64>)> {
    let mut s = cfg.c0.max(1.0) * 1.001;
    for _ in 0..24 {
        match lambda1(body, basis, s, cfg) {
            Ok(found) => return Ok(found),
            Err(Error::NoNonzeroPoint(_)) => s *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoNonzeroPoint(s))
}

/// General pipeline: recenter at an approximate Kovner-Besicovitch point and
/// run the symmetric pipeline on the symmetrized body `K[c]`. The covering
/// certificate transfers to `K` because `K[c] ⊆ K - c`.
pub fn thin_lattice_general(
    body: &CenteredBody,
    provider: &dyn EllipsoidProvider,
    cfg: &EngineConfig,
) -> Result<(CoveringLattice, DVector<f64>)> {
    if body.symmetric {
        let covering = thin_lattice_symmetric(body, provider, cfg)?;
        return Ok((covering, body.center.clone()));
    }
    // (1 + 1/6)^{-n} >= (6/7)^n, the approximation the thinness bound needs.
    let kb = crate::volume::kb_point(body, 1.0 / 6.0, cfg)?;
    let symmetrized = kb_body(body, &kb.c, cfg)?;
    let covering = thin_lattice_symmetric(&symmetrized, provider, cfg)?;
    Ok((covering, kb.c))
}

/// Stream the epsilon-net `(C - K) ∩ Λ`: the lattice shifts of the covering
/// body `K` that touch `C`. Requires a certified covering lattice for `K`.
pub fn epsilon_net(
    c_body: &CenteredBody,
    covering_body: &CenteredBody,
    covering: &CoveringLattice,
    cfg: &EngineConfig,
    sink: crate::enumeration::Sink,
) -> Result<EnumerationReport> {
    if !covering.is_certified_covering() {
        return Err(Error::CertificateMissing);
    }
    let difference = c_body.minkowski_sum(&covering_body.negate());
    enumeration::enumerate(&difference, &covering.basis, cfg, sink)
}

/// Collect the net points.
pub fn epsilon_net_collect(
    c_body: &CenteredBody,
    covering_body: &CenteredBody,
    covering: &CoveringLattice,
    cfg: &EngineConfig,
) -> Result<(Vec<DVector<f64>>, EnumerationReport)> {
    let mut pts = Vec::new();
    let mut sink = |_: &[i64], p: &DVector<f64>| {
        pts.push(p.clone());
        ControlFlow::Continue(())
    };
    let report = epsilon_net(c_body, covering_body, covering, cfg, &mut sink)?;
    Ok((pts, report))
}
