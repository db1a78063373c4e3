//! Weak optimization, rounding and fiber distance against exact planar
//! oracles.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use thinlat::convexopt::{fiber_distance, gls_round, weak_minimize, Fiber, LinearObjective};
use thinlat::refcheck::rng::{random_convex_polygon, SplitMix64};

#[test]
fn linear_minimization_matches_vertex_enumeration() {
    let cfg = cfg();
    let mut rng = SplitMix64::new(41);
    for seed in 0..8 {
        let poly = random_convex_polygon(seed + 300, 7).unwrap();
        let body = polygon_body(&poly, &cfg);
        for _ in 0..4 {
            let c = vec2(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
            // Exact optimum over the vertices.
            let exact = poly
                .vertices
                .iter()
                .map(|v| c[0] * v[0] + c[1] * v[1])
                .fold(f64::INFINITY, f64::min);
            let eps = 1e-4;
            let (y, omega) = weak_minimize(&body, &LinearObjective(c.clone()), eps, &cfg).unwrap();
            assert!(omega >= exact - 1e-6, "omega={omega} exact={exact}");
            assert!(omega - eps <= exact + 1e-9, "omega={omega} exact={exact}");
            assert!(body.gauge(&y, &cfg).unwrap() <= 1.0 + 1e-6);
        }
    }
}

#[test]
fn rounding_random_triangles_sandwich_in_64_directions() {
    let cfg = cfg();
    for seed in 0..6 {
        let poly = random_convex_polygon(seed + 900, 5).unwrap();
        let body = polygon_body(&poly, &cfg);
        let r = gls_round(&body, &cfg).unwrap();
        let color = r.coloring_map();
        for k in 0..64 {
            let angle = std::f64::consts::TAU * k as f64 / 64.0;
            let u = vec2(angle.cos(), angle.sin());
            // Support of the inner ellipsoid (centered at t) vs the body.
            let h_inner = (&color * &u).norm();
            let h_body = poly.support([u[0], u[1]]) - (r.t[0] * u[0] + r.t[1] * u[1]);
            assert!(
                h_inner <= h_body * (1.0 + 1e-6) + 1e-9,
                "seed={seed} inner={h_inner} body={h_body}"
            );
            assert!(
                h_body <= r.sandwich_factor * h_inner * (1.0 + 1e-6),
                "seed={seed} outer violated: body={h_body} factor*inner={}",
                r.sandwich_factor * h_inner
            );
        }
    }
}

#[test]
fn rounding_box_contains_normalized_ball() {
    // For the square, the returned ellipsoid must contain a Euclidean ball
    // of radius 1/(sqrt(n)(n+1)) after normalizing by the outer radius.
    let cfg = cfg();
    let body = polygon_body(&square(1.0), &cfg);
    let r = gls_round(&body, &cfg).unwrap();
    let eig = r.a.clone().symmetric_eigen();
    let min_axis = 1.0 / eig.eigenvalues.max().sqrt();
    let n = 2.0f64;
    assert!(min_axis >= 2f64.sqrt() / (n.sqrt() * (n + 1.0)) * 0.99);
}

#[test]
fn rounding_is_translation_equivariant() {
    let cfg = cfg();
    let poly = random_convex_polygon(77, 6).unwrap();
    let body = polygon_body(&poly, &cfg);
    let v = vec2(0.25, -0.5);
    let shifted = body.translate(&v);
    let r0 = gls_round(&body, &cfg).unwrap();
    let r1 = gls_round(&shifted, &cfg).unwrap();
    assert!((&r1.t - &r0.t - &v).amax() < 1e-6, "t drift {:?}", (&r1.t - &r0.t - &v));
    assert!((&r1.a - &r0.a).amax() <= 1e-6 * r0.a.amax());
}

#[test]
fn fiber_distance_through_and_past_the_ball() {
    let cfg = cfg();
    let ball = thinlat::geometry::CenteredBody::ball(2, 1.0);
    let through = Fiber {
        directions: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        offset: vec2(0.0, 0.5),
    };
    let (d, witness) = fiber_distance(&ball, &through, &cfg).unwrap();
    assert!(d <= 1e-4);
    assert!((witness[1] - 0.5).abs() < 1e-9);
    let past = Fiber {
        directions: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        offset: vec2(0.0, 2.0),
    };
    let (d, _) = fiber_distance(&ball, &past, &cfg).unwrap();
    assert!((d - 1.0).abs() < 1e-3, "d={d}");
}

#[test]
fn fiber_distance_matches_segment_geometry_on_polygons() {
    let cfg = cfg();
    for seed in 0..6 {
        let poly = random_convex_polygon(seed + 40, 6).unwrap();
        let body = polygon_body(&poly, &cfg);
        let mut rng = SplitMix64::new(seed + 1);
        for _ in 0..6 {
            let angle = rng.range(0.0, std::f64::consts::TAU);
            let dir = vec2(angle.cos(), angle.sin());
            let offset = vec2(rng.range(-3.0, 3.0), rng.range(-3.0, 3.0));
            let fiber = Fiber {
                directions: DMatrix::from_column_slice(2, 1, &[dir[0], dir[1]]),
                offset: offset.clone(),
            };
            let (d, _) = fiber_distance(&body, &fiber, &cfg).unwrap();
            // Exact line-polygon distance: minimum over vertices of the
            // distance to the line, or zero if the line crosses.
            let exact = line_polygon_distance(&poly, &offset, &dir);
            assert!(
                (d - exact).abs() <= 2e-3 * (1.0 + exact),
                "seed={seed} d={d} exact={exact}"
            );
        }
    }
}

fn line_polygon_distance(
    poly: &thinlat::refcheck::Polygon2D,
    offset: &DVector<f64>,
    dir: &DVector<f64>,
) -> f64 {
    // Signed perpendicular coordinates of the vertices; the line meets the
    // polygon iff the signs straddle zero.
    let normal = vec2(-dir[1], dir[0]);
    let coords: Vec<f64> = poly
        .vertices
        .iter()
        .map(|v| (v[0] - offset[0]) * normal[0] + (v[1] - offset[1]) * normal[1])
        .collect();
    let min = coords.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min <= 0.0 && max >= 0.0 {
        0.0
    } else {
        min.abs().min(max.abs())
    }
}

#[test]
fn fiber_distance_zero_when_interior_point_on_fiber() {
    let cfg = cfg();
    let mut rng = SplitMix64::new(99);
    for seed in 0..6 {
        let poly = random_convex_polygon(seed + 60, 6).unwrap();
        let body = polygon_body(&poly, &cfg);
        // Pick an interior point and a random fiber through it.
        let inner = &body.center;
        let angle = rng.range(0.0, std::f64::consts::TAU);
        let fiber = Fiber {
            directions: DMatrix::from_column_slice(2, 1, &[angle.cos(), angle.sin()]),
            offset: inner.clone(),
        };
        let (d, _) = fiber_distance(&body, &fiber, &cfg).unwrap();
        assert!(d <= 1e-5, "d={d}");
    }
}
