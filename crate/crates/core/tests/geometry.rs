//! Body oracle behavior: gauges, symmetrization, descriptor compilation and
//! the weak-oracle invariants.

mod common;

use common::*;
use nalgebra::DVector;
use thinlat::geometry::{compile, kb_body, BodyDescriptor, PExponent};
use thinlat::refcheck::rng::{random_convex_polygon, SplitMix64};
use thinlat::refcheck::{clip, exact_area, Polygon2D};

#[test]
fn gauge_of_linf_ball_is_coordinate_maximum() {
    let cfg = cfg();
    let body = compile(
        &BodyDescriptor::Lpball {
            p: PExponent(f64::INFINITY),
            radius: 1.0,
            dim: 2,
        },
        &cfg,
    )
    .unwrap();
    let g = body.gauge(&vec2(0.5, 0.25), &cfg).unwrap();
    assert!((g - 0.5).abs() < 1e-12);
    assert_eq!(body.gauge(&vec2(0.0, 0.0), &cfg).unwrap(), 0.0);
}

#[test]
fn gauge_matches_exact_ray_intersection_on_triangle() {
    let cfg = cfg();
    let tri = Polygon2D::new(vec![[-1.0, -1.0], [2.0, -1.0], [-1.0, 2.0]]).unwrap();
    // The gauge is taken about the origin, so recenter the compiled body
    // there (its certified center is the Chebyshev center otherwise).
    let body = polygon_body(&tri, &cfg)
        .recentered_at(&vec2(0.0, 0.0), &cfg)
        .unwrap();
    let mut rng = SplitMix64::new(11);
    for _ in 0..64 {
        let x = vec2(rng.range(-1.5, 1.5), rng.range(-1.5, 1.5));
        let expected = tri.ray_gauge([x[0], x[1]]);
        let got = body.gauge(&x, &cfg).unwrap();
        assert!((got - expected).abs() <= 1e-9 * expected.max(1.0));
        // The oracle route must agree as well, within the bisection band.
        let oracle = body.as_oracle_only().gauge(&x, &cfg).unwrap();
        assert!((oracle - expected).abs() <= 1e-6 * expected.max(1.0));
    }
}

#[test]
fn gauge_homogeneity_and_triangle_inequality() {
    let cfg = cfg();
    let mut rng = SplitMix64::new(5);
    for seed in 0..8 {
        let poly = random_convex_polygon(seed, 7).unwrap();
        let body = polygon_body(&poly, &cfg);
        let centered = body.translate(&(-&body.center));
        for _ in 0..32 {
            let x = vec2(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let y = vec2(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let s = rng.range(0.1, 3.0);
            let gx = centered.gauge(&x, &cfg).unwrap();
            let gs = centered.gauge(&(&x * s), &cfg).unwrap();
            assert!((gs - s * gx).abs() <= 2e-9 * (1.0 + s * gx));
            let gy = centered.gauge(&y, &cfg).unwrap();
            let gxy = centered.gauge(&(&x + &y), &cfg).unwrap();
            // Asymmetric gauges still satisfy subadditivity.
            assert!(gxy <= gx + gy + 3e-9);
        }
    }
}

#[test]
fn kb_body_of_square_center_is_square() {
    let cfg = cfg();
    let body = polygon_body(&square(0.5).translate([0.5, 0.5]), &cfg);
    let sym = kb_body(&body, &vec2(0.5, 0.5), &cfg).unwrap();
    assert!(sym.symmetric);
    // K[c] recentered is the full square: gauge of (0.5, 0) equals 1.
    let g = sym.gauge(&vec2(0.5, 0.0), &cfg).unwrap();
    assert!((g - 1.0).abs() < 1e-9, "g={g}");
}

#[test]
fn kb_body_centroid_area_matches_clipping_oracle() {
    let cfg = cfg();
    let tri = triangle();
    let body = polygon_body(&tri, &cfg);
    let c = vec2(1.0 / 3.0, 1.0 / 3.0);
    let sym = kb_body(&body, &c, &cfg).unwrap();
    // Oracle: clip (K - c) against (c - K).
    let shifted = tri.translate([-c[0], -c[1]]);
    let expected = exact_area(&clip(&shifted, &shifted.reflect()).unwrap());
    assert!((expected / exact_area(&tri) - 2.0 / 3.0).abs() < 1e-12);
    // Sampled agreement of the compiled symmetrization with the clip.
    let hexagon = clip(&shifted, &shifted.reflect()).unwrap();
    let mut rng = SplitMix64::new(3);
    for _ in 0..1000 {
        let x = vec2(rng.range(-0.7, 0.7), rng.range(-0.7, 0.7));
        let inside_body = sym.contains(&x);
        let inside_oracle = hexagon.contains([x[0], x[1]]);
        let margin = hexagon
            .halfplanes()
            .iter()
            .map(|(n, b)| (n[0] * x[0] + n[1] * x[1] - b).abs())
            .fold(f64::INFINITY, f64::min);
        if margin > 1e-9 {
            assert_eq!(inside_body, inside_oracle, "at {x:?}");
        }
        // Symmetry of the membership oracle.
        assert_eq!(inside_body, sym.contains(&-&x));
    }
}

#[test]
fn kb_body_rejects_outside_centers() {
    let cfg = cfg();
    let body = polygon_body(&triangle(), &cfg);
    assert!(kb_body(&body, &vec2(2.0, 2.0), &cfg).is_err());
}

#[test]
fn compiled_polytope_membership_is_exact() {
    let cfg = cfg();
    let mut rng = SplitMix64::new(17);
    for seed in 0..10 {
        let poly = random_convex_polygon(seed + 100, 8).unwrap();
        let body = polygon_body(&poly, &cfg);
        let rows = poly.halfplanes();
        for _ in 0..200 {
            let x = vec2(rng.range(-2.5, 2.5), rng.range(-2.5, 2.5));
            let direct = rows.iter().all(|(n, b)| n[0] * x[0] + n[1] * x[1] <= *b);
            assert_eq!(body.contains(&x), direct);
        }
    }
}

#[test]
fn descriptor_algebra_round_trips_through_json() {
    let cfg = cfg();
    let d = BodyDescriptor::Intersect {
        left: Box::new(BodyDescriptor::Scale {
            s: 2.0,
            inner: Box::new(BodyDescriptor::Lpball {
                p: PExponent(1.0),
                radius: 1.0,
                dim: 2,
            }),
        }),
        right: Box::new(BodyDescriptor::Translate {
            t: vec![0.25, 0.0],
            inner: Box::new(BodyDescriptor::Ellipsoid {
                a: vec![vec![1.0, 0.0], vec![0.0, 0.25]],
                t: vec![0.0, 0.0],
            }),
        }),
    };
    let text = serde_json::to_string(&d).unwrap();
    let parsed = BodyDescriptor::from_json(&text).unwrap();
    let a = compile(&d, &cfg).unwrap();
    let b = compile(&parsed, &cfg).unwrap();
    let mut rng = SplitMix64::new(23);
    for _ in 0..200 {
        let x = vec2(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
        assert_eq!(a.contains(&x), b.contains(&x));
    }
}

#[test]
fn affine_image_of_ball_is_ellipse() {
    let cfg = cfg();
    let d = BodyDescriptor::Affine {
        m: vec![vec![2.0, 0.0], vec![1.0, 1.0]],
        inner: Box::new(BodyDescriptor::Lpball {
            p: PExponent(2.0),
            radius: 1.0,
            dim: 2,
        }),
    };
    let body = compile(&d, &cfg).unwrap();
    // M maps (1,0) to (2,1); boundary point of the image.
    let g = body.gauge(&vec2(2.0, 1.0), &cfg).unwrap();
    assert!((g - 1.0).abs() < 1e-9);
}
