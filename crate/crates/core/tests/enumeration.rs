//! Enumeration against the coefficient-box scan and the structural bounds on
//! per-level node counts.

mod common;

use std::ops::ControlFlow;

use common::*;
use nalgebra::{DMatrix, DVector};
use thinlat::enumeration::{covering_radius_bracket, enumerate, enumerate_collect, is_far, lambda1};
use thinlat::geometry::{compile, BodyDescriptor, PExponent};
use thinlat::lattice::{adjoin, directional_basis, LatticeBasis, SublatticeSpec};
use thinlat::refcheck::rng::{random_convex_polygon, SplitMix64};
use thinlat::refcheck::{coeff_box_scan, minkowski_sum};

fn sorted_coeffs(pts: &[(Vec<i64>, DVector<f64>)]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = pts.iter().map(|(c, _)| c.clone()).collect();
    out.sort();
    out
}

#[test]
fn random_polytopes_match_box_scan() {
    let cfg = cfg();
    let mut rng = SplitMix64::new(7);
    for seed in 0..10 {
        let poly = random_convex_polygon(seed + 500, 7).unwrap();
        let scale = rng.range(0.8, 2.2);
        let body = polygon_body(&poly.scale(scale), &cfg);
        let basis = LatticeBasis::new(DMatrix::from_column_slice(
            2,
            2,
            &[
                rng.range(0.4, 0.9),
                rng.range(-0.3, 0.3),
                rng.range(-0.3, 0.3),
                rng.range(0.4, 0.9),
            ],
        ))
        .unwrap();
        let (pts, _) = enumerate_collect(&body, &basis, &cfg).unwrap();
        let scan = coeff_box_scan(&body, basis.columns()).unwrap();
        assert_eq!(sorted_coeffs(&pts), sorted_coeffs(&scan), "seed {seed}");
    }
}

#[test]
fn ellipsoids_match_box_scan_in_3d() {
    let cfg = cfg();
    let mut rng = SplitMix64::new(70);
    for seed in 0..5 {
        let scale = rng.range(1.2, 2.0);
        let d = BodyDescriptor::Affine {
            m: vec![
                vec![scale, 0.1 * seed as f64, 0.0],
                vec![0.0, 1.3, 0.2],
                vec![0.1, 0.0, 0.9],
            ],
            inner: Box::new(BodyDescriptor::Lpball {
                p: PExponent(2.0),
                radius: 1.0,
                dim: 3,
            }),
        };
        let body = compile(&d, &cfg).unwrap();
        let basis = LatticeBasis::identity(3);
        let (pts, _) = enumerate_collect(&body, &basis, &cfg).unwrap();
        let scan = coeff_box_scan(&body, basis.columns()).unwrap();
        assert_eq!(sorted_coeffs(&pts), sorted_coeffs(&scan), "seed {seed}");
    }
}

#[test]
fn sublattice_node_counts_never_exceed_parent() {
    let cfg = cfg();
    for seed in 0..8 {
        let poly = random_convex_polygon(seed + 700, 6).unwrap();
        let body = polygon_body(&poly.scale(2.0), &cfg);
        let z2 = LatticeBasis::identity(2);
        let (_, parent) = enumerate_collect(&body, &z2, &cfg).unwrap();
        let spec = SublatticeSpec::new(vec![1, seed % 5 + 1], 5).unwrap();
        let m = spec.directional_basis(&z2).unwrap();
        let (_, sub) = enumerate_collect(&body, &m, &cfg).unwrap();
        for (lvl, (s, p)) in sub
            .level_node_counts
            .iter()
            .zip(parent.level_node_counts.iter())
            .enumerate()
        {
            assert!(s <= p, "seed {seed} level {lvl}: {s} > {p}");
        }
    }
}

#[test]
fn superlattice_node_counts_bounded_by_index_times_parent() {
    let cfg = cfg();
    for seed in 0..8 {
        let poly = random_convex_polygon(seed + 800, 6).unwrap();
        let body = polygon_body(&poly.scale(1.5), &cfg);
        let z2 = LatticeBasis::identity(2);
        let (_, parent) = enumerate_collect(&body, &z2, &cfg).unwrap();
        let c = DVector::from_vec(vec![1.0 / 3.0, 2.0 / 3.0]);
        let sup = adjoin(&z2, &c, &cfg).unwrap();
        let (_, dense) = enumerate_collect(&body, &sup, &cfg).unwrap();
        for (lvl, (d, p)) in dense
            .level_node_counts
            .iter()
            .zip(parent.level_node_counts.iter())
            .enumerate()
        {
            // Index 3, plus slack for the tolerance band.
            assert!(*d <= 3 * p + 3, "seed {seed} level {lvl}: {d} > 3*{p}");
        }
    }
}

#[test]
fn parallelepiped_tiling_has_unit_level_counts() {
    // For the half-open basis parallelepiped itself, every level count is
    // one at any offset: the tiling property.
    let cfg = cfg();
    let basis = LatticeBasis::new(DMatrix::from_column_slice(2, 2, &[1.0, 0.2, -0.3, 0.8]))
        .unwrap();
    let mut rng = SplitMix64::new(4);
    for _ in 0..10 {
        let offset = vec2(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
        // Half-open parallelepiped B[-1/2, 1/2)^2 + offset, realized as a
        // closed body shrunk off the upper faces.
        let eps = 1e-7;
        let mut rows_a = Vec::new();
        let mut rows_b = Vec::new();
        let inv = basis.columns().clone().try_inverse().unwrap();
        for i in 0..2 {
            let row: Vec<f64> = (0..2).map(|j| inv[(i, j)]).collect();
            let dot = |r: &[f64]| r[0] * offset[0] + r[1] * offset[1];
            rows_a.push(row.clone());
            rows_b.push(0.5 - eps + dot(&row));
            rows_a.push(row.iter().map(|v| -v).collect());
            rows_b.push(0.5 - eps - dot(&row));
        }
        let body = compile(&BodyDescriptor::Hpolytope { a: rows_a, b: rows_b }, &cfg).unwrap();
        let (pts, report) = enumerate_collect(&body, &basis, &cfg).unwrap();
        assert_eq!(pts.len(), 1, "exactly one lattice point per tile");
        for (lvl, c) in report.level_node_counts.iter().enumerate() {
            assert_eq!(*c, 1, "level {lvl}");
        }
    }
}

#[test]
fn lambda1_and_is_far_examples() {
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
    let (l, _) = lambda1(&linf, &z2, 2.0, &cfg).unwrap();
    assert!((l - 1.0).abs() < 1e-9);
    assert!(is_far(&linf, &z2, &vec2(0.5, 0.5), 0.4, &cfg).unwrap());
    assert!(!is_far(&linf, &z2, &vec2(0.5, 0.5), 0.6, &cfg).unwrap());

    // Brute-force distances on random instances, off the band.
    let mut rng = SplitMix64::new(31);
    for seed in 0..6 {
        let poly = thinlat::refcheck::rng::random_symmetric_polygon(seed + 9, 4).unwrap();
        let body = polygon_body(&poly, &cfg);
        let x = vec2(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
        // Exhaustive distance over a generous coefficient box.
        let mut exact = f64::INFINITY;
        for i in -6i64..=6 {
            for j in -6i64..=6 {
                let p = vec2(i as f64, j as f64);
                exact = exact.min(poly.ray_gauge([x[0] - p[0], x[1] - p[1]]));
            }
        }
        for lambda in [exact * 0.9, exact * 1.1] {
            if (lambda - exact).abs() < 1e-9 {
                continue;
            }
            let far = is_far(&body, &z2, &x, lambda, &cfg).unwrap();
            assert_eq!(far, lambda < exact, "seed {seed} lambda {lambda} exact {exact}");
        }
    }
}

#[test]
fn covering_radius_bracket_l2_contains_voronoi_radius() {
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
    let z2 = LatticeBasis::identity(2);
    let (lo, hi) = covering_radius_bracket(&disk, &z2, 4, &cfg).unwrap();
    let mu = 2f64.sqrt() / 2.0;
    assert!(lo <= mu + 1e-9 && mu <= hi + 1e-9, "bracket ({lo}, {hi})");
}

#[test]
fn net_size_bound_against_brute_covering_number() {
    // |(C - K) ∩ Λ| <= 4^n t(n) N(C, K) with t = 3^n on certified
    // lattices; checked against the greedy upper bound for N.
    let cfg = cfg();
    for seed in 0..4 {
        let k_poly = thinlat::refcheck::rng::random_symmetric_polygon(seed + 21, 4).unwrap();
        let c_poly = random_convex_polygon(seed + 22, 6)
            .unwrap()
            .scale(1.6);
        let k_body = polygon_body(&k_poly, &cfg);
        let c_body = polygon_body(&c_poly, &cfg);
        let covering =
            thinlat::thinlattice::thin_lattice_symmetric(&k_body, &thinlat::thinlattice::GlsProvider, &cfg)
                .unwrap();
        let difference = c_body.minkowski_sum(&k_body.negate());
        let mut count = 0u64;
        let mut sink = |_: &[i64], _: &DVector<f64>| {
            count += 1;
            ControlFlow::Continue(())
        };
        enumerate(&difference, &covering.basis, &cfg, &mut sink).unwrap();
        let (upper, _) =
            thinlat::refcheck::brute_covering_number(&c_poly, &k_poly, k_poly.inradius_about_origin() / 4.5)
                .unwrap();
        let bound = 16.0 * 9.0 * upper as f64;
        assert!(
            (count as f64) <= bound,
            "seed {seed}: net {count} exceeds 4^n t(n) N = {bound}"
        );
        // Sanity on the oracle side: the sum polygon area over the lattice
        // determinant also controls the count.
        let sum = minkowski_sum(&c_poly, &k_poly.reflect());
        let density = thinlat::refcheck::exact_area(&sum) / covering.basis.det_abs();
        assert!(count as f64 >= density * 0.2);
    }
}

#[test]
fn directional_sublattice_spans_all_members() {
    // Reducing 200 random combinations of the parity basis against the
    // closed-form membership test.
    let cfg = cfg();
    let z2 = LatticeBasis::identity(2);
    let spec = SublatticeSpec::new(vec![1, 2], 11).unwrap();
    let m = spec.directional_basis(&z2).unwrap();
    let mut rng = SplitMix64::new(13);
    for _ in 0..200 {
        let a = (rng.next_u64() % 21) as i64 - 10;
        let b = (rng.next_u64() % 21) as i64 - 10;
        let v = m.point(&[a, b]);
        let coeffs = [v[0].round() as i64, v[1].round() as i64];
        assert!((v[0] - coeffs[0] as f64).abs() < 1e-9);
        assert!(spec.contains_coeffs(&coeffs));
    }
    // And the reverse inclusion through the directional transform.
    let d = directional_basis(&m, &z2, &cfg).unwrap();
    assert!((d.det_abs() - 11.0).abs() < 1e-9);
}
