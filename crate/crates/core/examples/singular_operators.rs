//! `S^(s)` applied twice to a Gaussian equals `−φ + Kφ`.

use std::sync::Arc;

use crackops::mesh::{build_graded_mesh, ratio_for_tip_fraction, GridFunction};
use crackops::singular_ops::{apply_k, apply_s_s};

fn main() -> crackops::Result<()> {
    let (l, n) = (100.0, 2048);
    let mesh = Arc::new(build_graded_mesh(l, n, ratio_for_tip_fraction(n, 1e-6), &[-5.0])?);
    let phi = GridFunction::from_fn(mesh.clone(), 0.0, f64::INFINITY, |x| (-(x + 5.0).powi(2)).exp())?;
    // S^(s)φ has a 1/x tail; keep it on a longer mesh
    let s1 = apply_s_s(&phi, Arc::new(mesh.extended_to(100.0 * l)?))?;
    let s2 = apply_s_s(&s1, mesh.clone())?;
    let k = apply_k(&phi)?;
    for x in [-20.0, -8.0, -5.0, -2.0, -0.5] {
        let i = mesh.nearest_index(x);
        println!(
            "x = {:8.4}  S²φ = {:+.6}  −φ + Kφ = {:+.6}",
            mesh.nodes()[i],
            s2.values[i],
            k.values[i] - phi.values[i]
        );
    }
    Ok(())
}
