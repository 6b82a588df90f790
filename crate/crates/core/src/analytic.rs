//! Closed-form point-force solutions for a semi-infinite crack.
//!
//! Forces act a distance `a` behind the tip. Symmetric loads are
//! `⟨p⟩ = −F δ(x+a)`, skew loads `⟦p⟧ = −2F δ(x+a)`.

use std::f64::consts::PI;

use crate::bimaterial::BimaterialConstants;

const ATANH_CLAMP: f64 = 1e-14;

fn atanh_clamped(t: f64) -> f64 {
    t.min(1.0 - ATANH_CLAMP).atanh()
}

/// Opening profile `(2/π) arctanh √(min(−x/a, −a/x))` per unit `F·compliance`.
pub fn opening_shape(a: f64, x: f64) -> f64 {
    let r = -x / a;
    let t = if r < 1.0 { r.sqrt() } else { (1.0 / r).sqrt() };
    2.0 / PI * atanh_clamped(t)
}

/// `−(1/π) √(a/−x)/(x+a)`: derivative of [`opening_shape`].
pub fn opening_derivative_shape(a: f64, x: f64) -> f64 {
    -(a / -x).sqrt() / (PI * (x + a))
}

/// `(1/π) √(a/x)/(x+a)` for `x > 0`.
pub fn traction_shape(a: f64, x: f64) -> f64 {
    (a / x).sqrt() / (PI * (x + a))
}

/// `√(2/(πa))`.
pub fn sif_shape(a: f64) -> f64 {
    (2.0 / (PI * a)).sqrt()
}

pub fn mode3_symmetric_opening(mat: &BimaterialConstants, a: f64, f: f64, x: f64) -> f64 {
    f * mat.antiplane() * opening_shape(a, x)
}

pub fn mode3_symmetric_traction(a: f64, f: f64, x: f64) -> f64 {
    f * traction_shape(a, x)
}

pub fn mode3_symmetric_sif(a: f64, f: f64) -> f64 {
    f * sif_shape(a)
}

/// Skew Mode III fields are the symmetric ones scaled by `η`.
pub fn mode3_skew_opening(mat: &BimaterialConstants, a: f64, f: f64, x: f64) -> f64 {
    mat.eta * mode3_symmetric_opening(mat, a, f, x)
}

pub fn mode3_skew_traction(mat: &BimaterialConstants, a: f64, f: f64, x: f64) -> f64 {
    mat.eta * mode3_symmetric_traction(a, f, x)
}

pub fn mode3_skew_sif(mat: &BimaterialConstants, a: f64, f: f64) -> f64 {
    mat.eta * mode3_symmetric_sif(a, f)
}

/// Mode I/II openings `[⟦u₁⟧, ⟦u₂⟧]` for symmetric forces `(F₁, F₂)`, `d = 0`.
pub fn mode12_symmetric_opening(mat: &BimaterialConstants, a: f64, f: [f64; 2], x: f64) -> [f64; 2] {
    let s = mat.b * opening_shape(a, x);
    [s * f[0], s * f[1]]
}

/// Tractions `[⟨σ₂₁⟩, ⟨σ₂₂⟩]` ahead of the tip for symmetric forces, `d = 0`.
pub fn mode12_symmetric_traction(a: f64, f: [f64; 2], x: f64) -> [f64; 2] {
    let s = traction_shape(a, x);
    [s * f[0], s * f[1]]
}

/// `(K_I, K_II)` for symmetric forces, `d = 0`.
pub fn mode12_symmetric_sif(a: f64, f: [f64; 2]) -> (f64, f64) {
    (sif_shape(a) * f[1], sif_shape(a) * f[0])
}

/// Opening jumps across `x = −a` for skew forces: `(bγF₂, −bγF₁)`. They follow
/// from the Flamant solution for the two half-planes.
pub fn flamant_jump_constants(mat: &BimaterialConstants, f: [f64; 2]) -> [f64; 2] {
    let c = mat.b * mat.gamma;
    [c * f[1], -c * f[0]]
}

/// Mode I/II openings for skew forces, `d = 0`. The jump constant is applied
/// for `x < −a`.
pub fn mode12_skew_opening(mat: &BimaterialConstants, a: f64, f: [f64; 2], x: f64) -> [f64; 2] {
    let s = mat.b * mat.alpha * opening_shape(a, x);
    let mut out = [s * f[0], s * f[1]];
    if x < -a {
        let j = flamant_jump_constants(mat, f);
        out[0] += j[0];
        out[1] += j[1];
    }
    out
}

pub fn mode12_skew_traction(mat: &BimaterialConstants, a: f64, f: [f64; 2], x: f64) -> [f64; 2] {
    let s = mat.alpha * traction_shape(a, x);
    [s * f[0], s * f[1]]
}

pub fn mode12_skew_sif(mat: &BimaterialConstants, a: f64, f: [f64; 2]) -> (f64, f64) {
    let s = mat.alpha * sif_shape(a);
    (s * f[1], s * f[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimaterial::{compute_constants, ElasticHalfSpace};

    #[test]
    fn opening_is_continuous_and_vanishes_at_ends() {
        let a = 1.5;
        assert!(opening_shape(a, -1e-12).abs() < 1e-5);
        assert!(opening_shape(a, -1e12).abs() < 1e-5);
        let l = opening_shape(a, -a * (1.0 - 1e-9));
        let r = opening_shape(a, -a * (1.0 + 1e-9));
        assert!((l - r).abs() < 1e-6 * l);
        assert!(opening_shape(a, -a).is_finite());
    }

    #[test]
    fn opening_derivative_matches_shape() {
        let a = 2.0;
        for x in [-0.3f64, -1.0, -3.0, -10.0] {
            let h = 1e-6 * x.abs();
            let fd = (opening_shape(a, x + h) - opening_shape(a, x - h)) / (2.0 * h);
            assert!((fd - opening_derivative_shape(a, x)).abs() < 1e-6 * fd.abs(), "{x}");
        }
    }

    #[test]
    fn traction_limits() {
        let a = 1.0;
        assert!((traction_shape(a, a) - 1.0 / (2.0 * PI * a)).abs() < 1e-15);
        let x = 1e-12;
        let k = (2.0 * PI * x).sqrt() * traction_shape(a, x);
        assert!((k - sif_shape(a)).abs() < 1e-10);
        assert!((sif_shape(1.0) - 0.797_884_560_802_865_4).abs() < 1e-15);
    }

    #[test]
    fn skew_scaling() {
        let m = compute_constants(
            &ElasticHalfSpace::new(1.0, 0.3).unwrap(),
            &ElasticHalfSpace::new(2.0, 0.2).unwrap(),
        )
        .unwrap();
        assert!((mode3_skew_sif(&m, 1.0, 1.0) - sif_shape(1.0) / 3.0).abs() < 1e-15);
        assert!((mode3_skew_traction(&m, 1.0, 1.0, 1.0) - 1.0 / (6.0 * PI)).abs() < 1e-15);
        let j = flamant_jump_constants(&m, [1.0, 2.0]);
        assert_eq!(j, [m.b * m.gamma * 2.0, -m.b * m.gamma]);
    }
}
