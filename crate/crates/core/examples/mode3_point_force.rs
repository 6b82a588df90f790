//! Antiplane point forces behind the tip: K_III against the closed forms.

use crackops::analytic;
use crackops::bimaterial::{compute_constants, ElasticHalfSpace};
use crackops::load::{LoadSpec, Symmetry};
use crackops::mode3::solve_mode3;

fn main() -> crackops::Result<()> {
    let mat = compute_constants(&ElasticHalfSpace::new(1.0, 0.3)?, &ElasticHalfSpace::new(2.0, 0.2)?)?;
    for sym in [Symmetry::Symmetric, Symmetry::Skew] {
        for a in [0.5, 1.0, 2.0] {
            let load = LoadSpec::point(a, [0.0, 0.0, 1.0], sym);
            let (crack, ahead) = load.solver_meshes(2048)?;
            let s = solve_mode3(&load, &mat, &crack, &ahead)?;
            let k = match sym {
                Symmetry::Symmetric => analytic::mode3_symmetric_sif(a, 1.0),
                Symmetry::Skew => analytic::mode3_skew_sif(&mat, a, 1.0),
            };
            println!("{sym:?} a = {a}: K_III = {:.8}  closed form {:.8}", s.k_iii, k);
        }
    }
    Ok(())
}
