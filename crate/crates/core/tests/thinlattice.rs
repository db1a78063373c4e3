//! Pipeline-level checks: certificates on random bodies, densification
//! bookkeeping, epsilon-net coverage, and the serialization round-trip.

mod common;

use std::ops::ControlFlow;

use common::*;
use nalgebra::DVector;
use thinlat::enumeration::{enumerate_collect, lambda1};
use thinlat::geometry::{compile, BodyDescriptor, PExponent};
use thinlat::lattice::LatticeBasis;
use thinlat::refcheck::rng::{random_convex_polygon, random_symmetric_polygon, SplitMix64};
use thinlat::refcheck::exact_area;
use thinlat::thinlattice::{
    epsilon_net_collect, m_lattice, packing_lattice, rogers_densify, thin_lattice_general,
    thin_lattice_symmetric, CoveringLattice, GlsProvider,
};

#[test]
fn symmetric_pipeline_on_the_unit_disk() {
    let cfg = cfg();
    let disk = compile(
        &BodyDescriptor::Lpball {
            p: PExponent(2.0),
            radius: 1.0,
            dim: 2,
        },
        &cfg,
    )
    .unwrap();
    let covering = thin_lattice_symmetric(&disk, &GlsProvider, &cfg).unwrap();
    assert!(covering.is_certified_covering());
    let ratio = covering.lambda1_bracket.0 / (2.0 * covering.mu_bracket.1);
    assert!(ratio >= 1.0 / 3.0 - 1e-3, "ratio={ratio}");
    let thinness = std::f64::consts::PI / covering.basis.det_abs();
    assert!(thinness <= 9.0 * 1.01, "thinness={thinness}");
}

#[test]
fn symmetric_pipeline_on_random_hexagons() {
    let cfg = cfg();
    for seed in 0..20 {
        let poly = random_symmetric_polygon(seed, 3).unwrap();
        let body = polygon_body(&poly, &cfg);
        let covering = thin_lattice_symmetric(&body, &GlsProvider, &cfg).unwrap();
        assert!(covering.is_certified_covering(), "seed {seed}");
        let ratio = covering.lambda1_bracket.0 / (2.0 * covering.mu_bracket.1);
        assert!(ratio >= 1.0 / 3.0 - 1e-3, "seed {seed} ratio {ratio}");
        let thinness = exact_area(&poly) / covering.basis.det_abs();
        assert!(thinness <= 9.0 * 1.01, "seed {seed} thinness {thinness}");
        // Minkowski bound on the certified minimum distance.
        let minkowski = 2.0 * (covering.basis.det_abs() / exact_area(&poly)).sqrt();
        assert!(
            covering.lambda1_bracket.1 <= minkowski * 1.02,
            "seed {seed}: lambda1 {} vs minkowski {minkowski}",
            covering.lambda1_bracket.1
        );
    }
}

#[test]
fn packing_density_at_least_c0_inverse_power() {
    let cfg = cfg();
    for seed in 0..6 {
        let poly = random_symmetric_polygon(seed + 50, 4).unwrap();
        let body = polygon_body(&poly, &cfg);
        let mlat = m_lattice(&body, &GlsProvider, &cfg).unwrap();
        let (m, _) = packing_lattice(&body, &mlat, &cfg).unwrap();
        let (lambda, _) = lambda1(&body, &m, cfg.c0 * 2.0, &cfg).unwrap();
        let density = exact_area(&poly.scale(lambda / 2.0)) / m.det_abs();
        assert!(
            density >= cfg.c0.powi(-2) * 0.99,
            "seed {seed}: density {density}"
        );
        assert!(lambda >= 1.0 - 1e-6, "seed {seed}: lambda {lambda}");
    }
}

#[test]
fn densification_preserves_lambda1_and_divides_det() {
    let cfg = cfg();
    for seed in 0..20 {
        let poly = random_symmetric_polygon(seed + 200, 4).unwrap();
        let body = polygon_body(&poly, &cfg);
        let mlat = m_lattice(&body, &GlsProvider, &cfg).unwrap();
        let (m, _) = packing_lattice(&body, &mlat, &cfg).unwrap();
        let (lambda, _) = lambda1(&body, &m, cfg.c0 * 2.0, &cfg).unwrap();
        let (dense, adjoins) = rogers_densify(&body, &m, lambda, &cfg).unwrap();
        // Determinant drops by exactly 3 per adjoin.
        let expected = m.det_abs() / 3f64.powi(adjoins as i32);
        assert!(
            (dense.det_abs() - expected).abs() <= 1e-9 * expected,
            "seed {seed}"
        );
        // Minimum distance unchanged.
        let (lambda_after, _) = lambda1(&body, &dense, lambda * 1.1, &cfg).unwrap();
        assert!(
            (lambda_after - lambda).abs() <= 1e-6 * lambda,
            "seed {seed}: {lambda} -> {lambda_after}"
        );
        // Adjoin count bounded by the packing-density logarithm.
        let alpha0 = exact_area(&poly.scale(lambda / 2.0)) / m.det_abs();
        let bound = (1.0 / alpha0).ln() / 3f64.ln();
        assert!(
            (adjoins as f64) <= bound.floor() + 1e-9,
            "seed {seed}: {adjoins} adjoins vs bound {bound}"
        );
    }
}

#[test]
fn general_pipeline_on_triangle_certifies_both_bodies() {
    let cfg = cfg_threaded();
    let tri = triangle();
    let body = polygon_body(&tri, &cfg);
    let (covering, c) = thin_lattice_general(&body, &GlsProvider, &cfg).unwrap();
    assert!(covering.is_certified_covering());
    // Thinness with respect to K is at most 7^n at n = 2.
    let thinness = exact_area(&tri) / covering.basis.det_abs();
    assert!(thinness <= 49.0 * 1.01, "thinness={thinness}");
    // The center must be a decent KB point (value within (7/6)^-2 of opt).
    let val = kb_value(&tri, &c);
    let (_, brute) = thinlat::refcheck::brute_kb(&tri, 0.02).unwrap();
    assert!(
        val >= (6.0 / 7.0f64).powi(2) * brute - 1e-3,
        "kb value {val} vs brute {brute}"
    );
}

#[test]
fn scaling_equivariance_of_the_symmetric_pipeline() {
    let cfg = cfg();
    let poly = random_symmetric_polygon(5, 4).unwrap();
    let body = polygon_body(&poly, &cfg);
    let covering = thin_lattice_symmetric(&body, &GlsProvider, &cfg).unwrap();
    let scaled_body = polygon_body(&poly.scale(2.0), &cfg);
    let scaled = thin_lattice_symmetric(&scaled_body, &GlsProvider, &cfg).unwrap();
    let diff = (scaled.basis.columns() - covering.basis.columns() * 2.0).amax();
    assert!(
        diff <= 1e-6 * covering.basis.columns().amax(),
        "scaling equivariance residual {diff}"
    );
}

#[test]
fn epsilon_net_covers_self() {
    let cfg = cfg();
    let poly = random_symmetric_polygon(9, 4).unwrap();
    let body = polygon_body(&poly, &cfg);
    let covering = thin_lattice_symmetric(&body, &GlsProvider, &cfg).unwrap();
    let (net, _) = epsilon_net_collect(&body, &body, &covering, &cfg).unwrap();
    assert!(!net.is_empty());
    // Every sampled point of C has a net point within gauge 1 + tol.
    let mut rng = SplitMix64::new(2);
    for _ in 0..200 {
        let x = vec2(rng.range(-1.5, 1.5), rng.range(-1.5, 1.5));
        if !body.contains(&x) {
            continue;
        }
        let covered = net
            .iter()
            .any(|y| poly.ray_gauge([x[0] - y[0], x[1] - y[1]]) <= 1.0 + 1e-6);
        assert!(covered, "uncovered point {x:?}");
    }
}

#[test]
fn epsilon_net_requires_certificate() {
    let cfg = cfg();
    let body = polygon_body(&square(1.0), &cfg);
    let mut uncovered = CoveringLattice::assume_covering(LatticeBasis::identity(2));
    uncovered.mu_bracket = (1.0, 10.0);
    assert!(matches!(
        epsilon_net_collect(&body, &body, &uncovered, &cfg),
        Err(thinlat::Error::CertificateMissing)
    ));
}

#[test]
fn cube_against_cube_net_size() {
    // C = K = [0,1]^2 over Z^2: the net is [-1,1]^2 ∩ Z^2, nine points.
    let cfg = cfg();
    let unit = compile(
        &BodyDescriptor::Hpolytope {
            a: vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            b: vec![1.0, 0.0, 1.0, 0.0],
        },
        &cfg,
    )
    .unwrap();
    let covering = CoveringLattice::assume_covering(LatticeBasis::identity(2));
    let (net, _) = epsilon_net_collect(&unit, &unit, &covering, &cfg).unwrap();
    assert_eq!(net.len(), 9);
    assert!(net.len() >= 4, "at least 2^n translates touch the cube");
}

#[test]
fn covering_lattice_json_round_trip() {
    let cfg = cfg();
    let body = polygon_body(&square(1.0), &cfg);
    let mut covering = thin_lattice_symmetric(&body, &GlsProvider, &cfg).unwrap();
    covering.thinness = Some(4.0 / covering.basis.det_abs());
    covering.body = Some(polygon_descriptor(&square(1.0)));
    let json = covering.to_json();
    let text = serde_json::to_string(&json).unwrap();
    let parsed: thinlat::thinlattice::CoveringLatticeJson = serde_json::from_str(&text).unwrap();
    let back = CoveringLattice::from_json(&parsed).unwrap();
    assert_eq!(covering.basis.columns(), back.basis.columns());
    assert_eq!(covering.mu_bracket, back.mu_bracket);
    assert_eq!(covering.lambda1_bracket, back.lambda1_bracket);
    assert_eq!(covering.thinness, back.thinness);
    assert_eq!(covering.index_trace.len(), back.index_trace.len());
    assert_eq!(covering.scale, back.scale);
}

#[test]
fn sparsifier_minimal_instance() {
    // A body with exactly one nonzero pair inside: N = 2, p = 3.
    let cfg = cfg();
    let d = BodyDescriptor::Hpolytope {
        a: vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ],
        b: vec![1.2, 1.2, 0.8, 0.8],
    };
    let body = compile(&d, &cfg).unwrap();
    let z2 = LatticeBasis::identity(2);
    let (m, spec) = packing_lattice(&body, &z2, &cfg).unwrap();
    assert_eq!(spec.p, 3);
    let (inside, _) = enumerate_collect(&body, &m, &cfg).unwrap();
    assert_eq!(inside.len(), 1, "only the origin remains");
}

#[test]
fn densify_noop_when_already_covered() {
    let cfg = cfg();
    let linf = compile(
        &BodyDescriptor::Lpball {
            p: PExponent(f64::INFINITY),
            radius: 1.0,
            dim: 2,
        },
        &cfg,
    )
    .unwrap();
    let z2 = LatticeBasis::identity(2);
    let (out, adjoins) = rogers_densify(&linf, &z2, 1.0, &cfg).unwrap();
    assert_eq!(adjoins, 0);
    assert_eq!(out.columns(), z2.columns());
}

#[test]
fn general_pipeline_random_polygons() {
    let cfg = cfg_threaded();
    for seed in 0..3 {
        let poly = random_convex_polygon(seed + 33, 6).unwrap();
        let body = polygon_body(&poly, &cfg);
        let (covering, c) = thin_lattice_general(&body, &GlsProvider, &cfg).unwrap();
        assert!(covering.is_certified_covering(), "seed {seed}");
        let val = kb_value(&poly, &DVector::from_vec(vec![c[0], c[1]]));
        assert!(val > 0.0, "seed {seed}: center must be interior");
        let thinness = exact_area(&poly) / covering.basis.det_abs();
        assert!(thinness <= 49.0 * 1.01, "seed {seed} thinness {thinness}");
    }
}
