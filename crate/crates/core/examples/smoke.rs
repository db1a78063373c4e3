use std::time::Instant;
use thinlat::{EngineConfig};
use thinlat::geometry::{compile, BodyDescriptor};
use thinlat::volume::{estimate_volume, kb_point};

fn main() {
    let cfg = EngineConfig::default();
    // Triangle (0,0), (1,0), (0,1)
    let tri = compile(&BodyDescriptor::Hpolytope {
        a: vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
        b: vec![0.0, 0.0, 1.0],
    }, &cfg).unwrap();
    let t0 = Instant::now();
    let kb = kb_point(&tri, 0.5, &cfg).unwrap();
    println!("kb_point eps=0.5: c = {:?} iterations = {} in {:?}", kb.c.as_slice(), kb.iterations, t0.elapsed());
    let t1 = Instant::now();
    let est = estimate_volume(&tri, 0.25, &cfg).unwrap();
    println!("volume eps=0.25: V = {} (true 0.5, bound {}) pts={} in {:?}", est.value, 0.5*1.25f64.powi(2), est.points_counted, t1.elapsed());
}
