//! In-plane point forces: the decoupled path for d = 0, the Fredholm path
//! otherwise.

use crackops::analytic;
use crackops::bimaterial::{compute_constants, ElasticHalfSpace};
use crackops::load::{LoadSpec, Symmetry};
use crackops::mode12::{self, FREDHOLM_FAR_FACTOR, FREDHOLM_TIP_FRACTION};

fn main() -> crackops::Result<()> {
    let f = [0.7, 1.3];
    let matched = compute_constants(&ElasticHalfSpace::new(1.0, 0.25)?, &ElasticHalfSpace::new(2.0, 0.0)?)?;
    for sym in [Symmetry::Symmetric, Symmetry::Skew] {
        let load = LoadSpec::point(1.0, [f[0], f[1], 0.0], sym);
        let (crack, ahead) = load.solver_meshes(2048)?;
        let s = mode12::solve_decoupled_d0(&load, &matched, &crack, &ahead)?;
        let (ki, kii) = match sym {
            Symmetry::Symmetric => analytic::mode12_symmetric_sif(1.0, f),
            Symmetry::Skew => analytic::mode12_skew_sif(&matched, 1.0, f),
        };
        println!("d = 0, {sym:?}: K_I = {:.8} ({ki:.8}), K_II = {:.8} ({kii:.8})", s.k_i, s.k_ii);
        println!("  opening jumps at -a: {:?}", mode12::opening_jumps(&s, -1.0));
    }

    let mat = compute_constants(&ElasticHalfSpace::new(1.0, 0.3)?, &ElasticHalfSpace::new(2.0, 0.2)?)?;
    let load = LoadSpec::point(1.0, [f[0], f[1], 0.0], Symmetry::Symmetric);
    let (crack, ahead) = load.solver_meshes_with(2048, FREDHOLM_FAR_FACTOR, FREDHOLM_TIP_FRACTION)?;
    let s = mode12::solve_general(&load, &mat, &crack, &ahead)?;
    let r = mode12::coupled_residual(&s.opening_derivative, &load, &mat, 2)?;
    println!(
        "d = {:.4}: K_I = {:.8}, K_II = {:.8}, residual {:.2e}, condition {:.2e}",
        mat.d,
        s.k_i,
        s.k_ii,
        r.max(),
        s.condition_estimate.unwrap_or(f64::NAN)
    );
    Ok(())
}
