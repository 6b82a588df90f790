//! Interface constants for a pair of half-spaces, and their swap symmetry.

use crackops::bimaterial::{compute_constants, ElasticHalfSpace};

fn main() -> crackops::Result<()> {
    let upper = ElasticHalfSpace::new(1.0, 0.3)?;
    let lower = ElasticHalfSpace::new(2.0, 0.2)?;
    let c = compute_constants(&upper, &lower)?;
    let s = compute_constants(&lower, &upper)?;
    println!("b = {:.6}  e = {:.6}  d = {:.6}  f = {:.6}", c.b, c.e, c.d, c.f);
    println!("alpha = {:.6}  gamma = {:.6}  eta = {:.6}  p = {:.6}", c.alpha, c.gamma, c.eta, c.p);
    println!(
        "b + e = {:.6}, 1/mu+ + 1/mu- = {:.6}",
        c.antiplane(),
        1.0 / upper.shear_modulus + 1.0 / lower.shear_modulus
    );
    println!("swapped: d = {:.6}, eta = {:.6}", s.d, s.eta);
    Ok(())
}
