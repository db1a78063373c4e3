//! Deterministic test-instance generators. A tiny splitmix generator keeps
//! the oracle side free of external dependencies and makes every "random"
//! acceptance instance reproducible from its seed.

use super::{convex_hull, Polygon2D};
use crate::error::Result;

/// SplitMix64: enough randomness for test geometry, fully deterministic.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Random convex polygon containing the origin strictly.
pub fn random_convex_polygon(seed: u64, points: usize) -> Result<Polygon2D> {
    let mut rng = SplitMix64::new(seed);
    loop {
        let pts: Vec<[f64; 2]> = (0..points.max(4))
            .map(|_| {
                let a = rng.range(0.0, std::f64::consts::TAU);
                let r = rng.range(0.6, 1.8);
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        if let Ok(hull) = convex_hull(&pts) {
            if hull.inradius_about_origin() > 0.15 {
                return Ok(hull);
            }
        }
    }
}

/// Random symmetric convex polygon (hull of point pairs `±p`).
pub fn random_symmetric_polygon(seed: u64, pairs: usize) -> Result<Polygon2D> {
    let mut rng = SplitMix64::new(seed);
    loop {
        let mut pts = Vec::with_capacity(2 * pairs.max(2));
        for _ in 0..pairs.max(2) {
            let a = rng.range(0.0, std::f64::consts::TAU);
            let r = rng.range(0.6, 1.8);
            let p = [r * a.cos(), r * a.sin()];
            pts.push(p);
            pts.push([-p[0], -p[1]]);
        }
        if let Ok(hull) = convex_hull(&pts) {
            if hull.inradius_about_origin() > 0.15 {
                return Ok(hull);
            }
        }
    }
}
