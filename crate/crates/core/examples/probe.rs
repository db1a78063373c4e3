use std::ops::ControlFlow;
use std::time::Instant;
use nalgebra::DVector;
use thinlat::EngineConfig;
use thinlat::geometry::{compile, kb_body, BodyDescriptor};
use thinlat::thinlattice::{thin_lattice_symmetric, GlsProvider};
use thinlat::volume::estimate_with_lattice;
use thinlat::enumeration;

fn main() {
    let cfg = EngineConfig::default();
    let tri = compile(&BodyDescriptor::Hpolytope {
        a: vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
        b: vec![0.0, 0.0, 1.0],
    }, &cfg).unwrap();
    // mimic one fine round at x = centroid
    let x = DVector::from_vec(vec![1.0/3.0, 1.0/3.0]);
    let eps = 1.0/6.0f64;
    let eps0 = eps / (6.0 + 3.0*eps);
    let eps_vol = eps0 / (1.0 - eps0);
    let t0 = Instant::now();
    let kx = kb_body(&tri, &x, &cfg).unwrap();
    let lat_x = thin_lattice_symmetric(&kx, &GlsProvider, &cfg).unwrap().normalized_to_certificate();
    println!("pipeline: {:?}  det={} mu={:?}", t0.elapsed(), lat_x.basis.det_abs(), lat_x.mu_bracket);
    println!("area(kx) approx {} -> thinness_eff {}", 2.0/3.0*0.5, (2.0/3.0*0.5)/lat_x.basis.det_abs());
    let half = tri.translate(&x).scale(0.5);
    let cov = kx.scale(eps0/2.0);
    let lat_cov = lat_x.scaled_with_body(eps0/2.0);
    let diff = half.minkowski_sum(&cov.negate());
    let t1 = Instant::now();
    let mut net = Vec::new();
    let mut sink = |_: &[i64], p: &DVector<f64>| { net.push(p.clone()); ControlFlow::Continue(()) };
    let rep = enumeration::enumerate(&diff, &lat_cov.basis, &cfg, &mut sink).unwrap();
    println!("net: {} points, {} solves, {:?}", net.len(), rep.fiber_solves, t1.elapsed());
    // evaluate a few candidates
    let t2 = Instant::now();
    let mut total_pts = 0u64;
    let k = 50.min(net.len());
    let mut tb = std::time::Duration::ZERO;
    let mut tc = std::time::Duration::ZERO;
    for y in net.iter().take(k) {
        let ky = kb_body(&tri, y, &cfg).unwrap();
        let s0 = Instant::now();
        let mu = thinlat::enumeration::covering_radius_bracket_with_tol(&ky, &lat_x.basis, 3, 0.02, &cfg).unwrap();
        tb += s0.elapsed();
        let mut lat_y = lat_x.clone();
        lat_y.mu_bracket = mu;
        let lat_y = lat_y.normalized_to_certificate();
        let s1 = Instant::now();
        let est = estimate_with_lattice(&ky, eps_vol, &lat_y, &DVector::zeros(2), &cfg).unwrap();
        tc += s1.elapsed();
        total_pts += est.points_counted;
    }
    println!("bracket time {:?} count time {:?}", tb/k as u32, tc/k as u32);
    println!("{} candidates in {:?} -> avg {:?}/cand, avg pts {}", k, t2.elapsed(), t2.elapsed()/k as u32, total_pts/k as u64);
}
