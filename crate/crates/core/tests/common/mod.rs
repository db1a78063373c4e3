//! Shared helpers for the integration suites: polygon-to-descriptor
//! conversion and deterministic instance generators.

#![allow(dead_code)]

use nalgebra::DVector;
use thinlat::geometry::{compile, BodyDescriptor, CenteredBody};
use thinlat::refcheck::Polygon2D;
use thinlat::EngineConfig;

pub fn cfg() -> EngineConfig {
    EngineConfig::default()
}

/// Config with both worker threads enabled for the heavy net evaluations.
pub fn cfg_threaded() -> EngineConfig {
    let mut cfg = EngineConfig::default();
    cfg.threads = 2;
    cfg
}

pub fn polygon_descriptor(p: &Polygon2D) -> BodyDescriptor {
    let rows = p.halfplanes();
    BodyDescriptor::Hpolytope {
        a: rows.iter().map(|(n, _)| vec![n[0], n[1]]).collect(),
        b: rows.iter().map(|(_, b)| *b).collect(),
    }
}

pub fn polygon_body(p: &Polygon2D, cfg: &EngineConfig) -> CenteredBody {
    compile(&polygon_descriptor(p), cfg).expect("polygon compiles")
}

pub fn triangle() -> Polygon2D {
    Polygon2D::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
}

pub fn square(r: f64) -> Polygon2D {
    Polygon2D::new(vec![[r, r], [-r, r], [-r, -r], [r, -r]]).unwrap()
}

pub fn vec2(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

/// Exact KB value of a candidate center by polygon clipping.
pub fn kb_value(p: &Polygon2D, c: &DVector<f64>) -> f64 {
    thinlat::refcheck::kb_value(p, [c[0], c[1]])
}
