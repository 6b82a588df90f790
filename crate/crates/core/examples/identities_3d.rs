//! Plane identities, the reduction to two dimensions and the transform table.

use crackops::bimaterial::{compute_constants, ElasticHalfSpace};
use crackops::elast3d::{fourier_table_check, verify_reduction, verify_theorems};

fn main() -> crackops::Result<()> {
    let n = 256;
    for case in verify_theorems(n)?.cases {
        println!("{:40} {:.2e}", case.name, case.error);
    }
    let mat = compute_constants(&ElasticHalfSpace::new(1.0, 0.3)?, &ElasticHalfSpace::new(2.0, 0.2)?)?;
    let r = verify_reduction(&mat, n)?;
    println!(
        "reduction: antiplane {:.2e}/{:.2e}, in-plane {:.2e}/{:.2e}",
        r.mode3_crack, r.mode3_ahead, r.plane_crack, r.plane_ahead
    );
    let t = fourier_table_check()?;
    for row in &t.rows {
        println!("row {:2}: {:.2e}", row.row, row.discrepancy);
    }
    println!("inverse of 1/rho at (1, 0): {:.6} (1/2pi = {:.6})", t.inverse_one_over_rho, 0.5 / std::f64::consts::PI);
    Ok(())
}
