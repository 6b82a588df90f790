use std::time::Instant;

use crackops::analytic;
use crackops::bimaterial::{compute_constants, ElasticHalfSpace};
use crackops::load::{LoadSpec, Symmetry};
use crackops::mode3::solve_mode3;

#[test]
fn symmetric_point_force_against_closed_form() {
    let mat = compute_constants(
        &ElasticHalfSpace::new(1.0, 0.3).unwrap(),
        &ElasticHalfSpace::new(2.0, 0.2).unwrap(),
    )
    .unwrap();
    for a in [0.5, 1.0, 2.0] {
        let t0 = Instant::now();
        let load = LoadSpec::point(a, [0.0, 0.0, 1.0], Symmetry::Symmetric);
        let (m, ahead) = load.solver_meshes(2048).unwrap();
        let s = solve_mode3(&load, &mat, &m, &ahead).unwrap();
        let k = analytic::mode3_symmetric_sif(a, 1.0);
        println!(
            "a={a}: K {} vs {k}, from K0 {:?}, {:?}",
            s.k_iii,
            s.k_iii_from_k0,
            t0.elapsed()
        );
        let mut worst = 0.0f64;
        for (x, v) in m.nodes().iter().zip(&s.opening.values) {
            if (-10.0 * a..=-0.01 * a).contains(x) && (x + a).abs() > 0.01 * a {
                let e = analytic::mode3_symmetric_opening(&mat, a, 1.0, *x);
                worst = worst.max((v - e).abs() / e.abs());
            }
        }
        let mut worst_t = 0.0f64;
        for (x, v) in ahead.nodes().iter().zip(&s.traction_ahead.values) {
            if (0.01 * a..=10.0 * a).contains(x) {
                let e = analytic::mode3_symmetric_traction(a, 1.0, *x);
                worst_t = worst_t.max((v - e).abs() / e.abs());
            }
        }
        println!("  opening {worst:.2e}, traction {worst_t:.2e}");
        assert!((s.k_iii - k).abs() < 0.01 * k);
    }
}
