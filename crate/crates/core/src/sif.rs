//! Stress intensity factors from tractions sampled ahead of the tip.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{CrackError, Result};
use crate::mesh::GridFunction;

/// Outcome of the near-tip extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SifEstimate {
    pub value: f64,
    /// Lower-degree estimate used as the convergence check.
    pub companion: f64,
    pub samples: usize,
}

impl SifEstimate {
    pub fn spread(&self) -> f64 {
        (self.value - self.companion).abs()
    }
}

/// Window `[lo, hi]` (in units of the load length scale) over which
/// `√(2πx)·σ(x)` is fitted.
pub const WINDOW: (f64, f64) = (1e-5, 1e-2);

const DEGREES: (usize, usize) = (3, 4);

fn fit_intercept(u: &[f64], g: &[f64], degree: usize) -> Result<f64> {
    let a = DMatrix::from_fn(u.len(), degree + 1, |i, j| u[i].powi(j as i32));
    let rhs = DVector::from_column_slice(g);
    let c = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| CrackError::NonConvergent(e.to_string()))?;
    Ok(c[0])
}

/// Extrapolates `lim_{x→0⁺} √(2πx)·σ(x)` with polynomial fits in `√x` over
/// the nodes in `scale·WINDOW`. Estimates of two degrees must agree within
/// `rtol·max(|K|, atol)`.
pub fn extract_sif(traction: &GridFunction, scale: f64, rtol: f64, atol: f64) -> Result<SifEstimate> {
    let (lo, hi) = (WINDOW.0 * scale, WINDOW.1 * scale);
    let mut u = Vec::new();
    let mut g = Vec::new();
    for (x, t) in traction.nodes().iter().zip(&traction.values) {
        if *x >= lo && *x <= hi {
            u.push((x / scale).sqrt());
            g.push((2.0 * PI * x).sqrt() * t);
        }
    }
    if u.len() < 2 * (DEGREES.1 + 1) {
        return Err(CrackError::NonConvergent(format!(
            "only {} traction samples in ({lo:.3e}, {hi:.3e})",
            u.len()
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(CrackError::NonConvergent("non-finite traction near the tip".into()));
    }
    let companion = fit_intercept(&u, &g, DEGREES.0)?;
    let value = fit_intercept(&u, &g, DEGREES.1)?;
    let est = SifEstimate {
        value,
        companion,
        samples: u.len(),
    };
    if est.spread() > rtol * value.abs().max(atol) {
        return Err(CrackError::NonConvergent(format!(
            "estimates {value:.6e} and {companion:.6e} disagree"
        )));
    }
    Ok(est)
}

/// In-plane factors from `σ₂₁`, `σ₂₂` sampled on the same mesh, with
/// `K_II + iK_I = lim √(2πx)·x^{iε}(σ₂₁ + iσ₂₂)`. For `ε = 0` this is the
/// componentwise limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSif {
    pub k_i: SifEstimate,
    pub k_ii: SifEstimate,
}

pub fn extract_sif_plane(
    s21: &GridFunction,
    s22: &GridFunction,
    epsilon: f64,
    scale: f64,
    rtol: f64,
    atol: f64,
) -> Result<PlaneSif> {
    if s21.mesh != s22.mesh {
        return Err(CrackError::Mesh("traction components on different meshes".into()));
    }
    let mut re = s21.clone();
    let mut im = s22.clone();
    if epsilon != 0.0 {
        for (i, x) in s21.nodes().iter().enumerate() {
            let (sn, cs) = (epsilon * x.ln()).sin_cos();
            re.values[i] = cs * s21.values[i] - sn * s22.values[i];
            im.values[i] = sn * s21.values[i] + cs * s22.values[i];
        }
    }
    let joint = |k: &SifEstimate, other: &SifEstimate| k.spread() <= rtol * k.value.hypot(other.value).max(atol);
    let k_ii = extract_sif(&re, scale, f64::INFINITY, atol)?;
    let k_i = extract_sif(&im, scale, f64::INFINITY, atol)?;
    if !joint(&k_i, &k_ii) || !joint(&k_ii, &k_i) {
        return Err(CrackError::NonConvergent(format!(
            "in-plane estimates disagree: K_I {} vs {}, K_II {} vs {}",
            k_i.value, k_i.companion, k_ii.value, k_ii.companion
        )));
    }
    Ok(PlaneSif { k_i, k_ii })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{sif_shape, traction_shape};
    use crate::mesh::{build_ahead_mesh, ratio_for_tip_fraction};
    use std::sync::Arc;

    fn ahead() -> Arc<crate::mesh::SemiAxisMesh> {
        Arc::new(build_ahead_mesh(1000.0, 2048, ratio_for_tip_fraction(2048, 1e-10)).unwrap())
    }

    #[test]
    fn closed_form_traction() {
        let m = ahead();
        for (a, eta) in [(1.0, 1.0), (1.0, 1.0 / 3.0), (0.5, 1.0)] {
            let t = GridFunction::from_fn(m.clone(), 0.5, 1.5, |x| eta * traction_shape(a, x)).unwrap();
            let k = extract_sif(&t, a, 1e-3, 1e-12).unwrap();
            assert!((k.value - eta * sif_shape(a)).abs() < 1e-7, "{k:?}");
        }
    }

    #[test]
    fn zero_traction() {
        let t = GridFunction::zeros(ahead());
        assert_eq!(extract_sif(&t, 1.0, 1e-3, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn oscillation_is_flagged() {
        let m = ahead();
        let t = GridFunction::from_fn(m, 0.5, 1.5, |x| (3.0 * x.ln()).cos() / x.sqrt()).unwrap();
        assert!(matches!(
            extract_sif(&t, 1.0, 1e-3, 1e-12),
            Err(CrackError::NonConvergent(_))
        ));
    }
}
