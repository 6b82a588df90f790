//! Inverts `S^(s)φ = ψ` for a bump and for a slowly decaying right-hand side.

use std::sync::Arc;

use crackops::field::LineField;
use crackops::inversion::{invert_classic, invert_slow_decay, AsymptoticSpec};
use crackops::mesh::{build_graded_mesh, ratio_for_tip_fraction, GridFunction};

fn main() -> crackops::Result<()> {
    let n = 2048;
    let mesh = Arc::new(build_graded_mesh(1000.0, n, ratio_for_tip_fraction(n, 1e-7), &[])?);
    let bump = GridFunction::from_fn(mesh.clone(), 0.0, f64::INFINITY, |x| (-(x + 5.0).powi(2)).exp())?;

    let psi = LineField::from_regular(bump.clone());
    let r = invert_classic(&psi)?;
    println!("classic: K0 = {:.6e}", r.k0.unwrap_or(f64::NAN));
    report(&psi, &r.phi)?;

    let slow = psi.lin_comb(1.0, &LineField::power_law(mesh.clone(), 1.0, 0.25)?, 1.0)?;
    let spec = AsymptoticSpec {
        alpha0: 0.25,
        far_terms: vec![(1.0, 0.25)],
        beta: f64::INFINITY,
    };
    let r = invert_slow_decay(&slow, &spec)?;
    println!("slow decay: C0 = {:.6e}", r.c0.unwrap_or(f64::NAN));
    report(&slow, &r.phi)
}

fn report(psi: &LineField, phi: &LineField) -> crackops::Result<()> {
    let back = phi.s_s()?.values_at_nodes()?;
    let want = psi.values_at_nodes()?;
    let err = psi
        .mesh()
        .nodes()
        .iter()
        .zip(back.iter().zip(&want))
        .filter(|(x, _)| (-100.0..=-1e-4).contains(*x))
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    println!("  max |S^(s)φ − ψ| on [−100, 0) = {err:.2e}");
    Ok(())
}
