//! Closed-form inversion of `S^(s)`.
//!
//! For `S^(s)φ = ψ` the bounded-energy solution is
//! `φ(x) = −(1/π)∫ √(ξ/x) ψ(ξ)/(x−ξ) dξ = −(−x)^{−1/2} S^(s)[√(−ξ)ψ](x)`.
//! Point masses are inverted exactly: `δ(·+a) ↦ −(1/π)√(a/−x)/(x+a)`.

use std::f64::consts::PI;

use crate::error::{CrackError, Result};
use crate::field::{is_zero, LineField, Pole, PowerLaw};
use crate::mesh::{integrate, GridFunction};
use crate::singular_ops::apply_s_s;

/// Declared behaviour of a slowly decaying right-hand side:
/// `ψ ~ (−x)^{−alpha0}` at the tip and `ψ − Σ cⱼ(−x)^{−αⱼ} = O((−x)^{−beta})`
/// far away.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSpec {
    pub alpha0: f64,
    /// Pairs `(cⱼ, αⱼ)` with `αⱼ ∈ (0, 1/2)`.
    pub far_terms: Vec<(f64, f64)>,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct InversionResult {
    pub phi: LineField,
    /// Coefficient of `(−x)^{−1/2}` at the tip; `None` when the right-hand
    /// side is too singular there for it to exist.
    pub k0: Option<f64>,
    /// Coefficient of `(−x)^{−3/2}` at infinity; `None` when it diverges.
    pub k_infinity: Option<f64>,
    pub c0: Option<f64>,
}

fn check_rhs(psi: &LineField) -> Result<()> {
    if !psi.poles.is_empty() {
        return Err(CrackError::Unsupported(
            "inversion of a right-hand side with poles".into(),
        ));
    }
    check_rhs_with_poles(psi)
}

fn check_rhs_with_poles(psi: &LineField) -> Result<()> {
    if psi.poles.iter().any(|p| !(p.position < 0.0)) {
        return Err(CrackError::validation("position", "poles must lie on x < 0"));
    }
    if !psi.tips.is_empty() {
        return Err(CrackError::Inversion(
            "tip singularities lie in the kernel of S^(s)".into(),
        ));
    }
    if psi.powers.iter().any(|p| p.exponent == 0.5) {
        return Err(CrackError::Inversion(
            "(−x)^{−1/2} lies in the kernel of S^(s)".into(),
        ));
    }
    if psi.masses.iter().any(|m| !(m.position < 0.0)) {
        return Err(CrackError::validation("position", "point masses must lie on x < 0"));
    }
    let g = &psi.regular;
    if !is_zero(g) && g.tip_exponent >= 1.0 {
        return Err(CrackError::Inversion(format!(
            "tip exponent {} is not below 1",
            g.tip_exponent
        )));
    }
    Ok(())
}

/// `K₀ = −(1/π)∫ψ/√(−ξ)` and `K∞ = (1/π)∫ψ√(−ξ)`. A pole adds nothing to
/// `K₀` (the principal value vanishes) and makes `K∞` diverge.
pub fn asymptotic_constants(psi: &LineField) -> Result<(f64, Option<f64>)> {
    check_rhs_with_poles(psi)?;
    if !psi.powers.is_empty() {
        return Err(CrackError::NotIntegrable(
            "K0 diverges for a global power law".into(),
        ));
    }
    if !is_zero(&psi.regular) && psi.regular.tip_exponent >= 0.5 {
        return Err(CrackError::NotIntegrable(format!(
            "K0 diverges for tip exponent {}",
            psi.regular.tip_exponent
        )));
    }
    let mut k0 = 0.0;
    let mut kinf = Some(0.0);
    let g = &psi.regular;
    if !is_zero(g) {
        let w = weighted(g, -0.5)?;
        k0 -= integrate(&w)? / PI;
        let far_exp = g.decay_exponent - 0.5;
        kinf = if far_exp > 1.0 {
            let w = weighted(g, 0.5)?;
            Some(integrate(&w)? / PI)
        } else {
            None
        };
    }
    for m in &psi.masses {
        let a = -m.position;
        k0 -= m.weight / (PI * a.sqrt());
        kinf = kinf.map(|k| k + m.weight * a.sqrt() / PI);
    }
    if !psi.poles.is_empty() {
        kinf = None;
    }
    Ok((k0, kinf))
}

/// `g(ξ)·(−ξ)^p` with exponents shifted accordingly.
fn weighted(g: &GridFunction, p: f64) -> Result<GridFunction> {
    let values = g
        .nodes()
        .iter()
        .zip(&g.values)
        .map(|(x, v)| v * (-x).powf(p))
        .collect();
    let tip = (g.tip_exponent - p).max(0.0);
    if tip >= 1.0 {
        return Err(CrackError::NotIntegrable(format!("tip exponent {tip}")));
    }
    let decay = g.decay_exponent - p;
    if decay <= 0.0 {
        return Err(CrackError::NotIntegrable(format!("decay exponent {decay}")));
    }
    GridFunction::new(g.mesh.clone(), values, tip, decay)
}

/// Exact inverse of a unit mass at `−a`, split into `−P_a` and a regular part.
fn invert_mass(psi_mesh: &LineField, position: f64, weight: f64) -> Result<LineField> {
    let a = -position;
    let mut f = LineField::from_regular(GridFunction::from_fn(
        psi_mesh.mesh().clone(),
        0.5,
        1.0,
        |x| -weight / (PI * (-x + (-a * x).sqrt())),
    )?);
    f.poles.push(Pole {
        position,
        coefficient: -weight,
    });
    Ok(f)
}

/// Bounded-energy inverse for right-hand sides decaying faster than
/// `(−x)^{−1/2}`. A pole `c/(π(x−p))` inverts to the mass `c·δ(x−p)`.
pub fn invert_classic(psi: &LineField) -> Result<InversionResult> {
    check_rhs_with_poles(psi)?;
    let g = &psi.regular;
    if !is_zero(g) && g.decay_exponent <= 0.5 {
        return Err(CrackError::Inversion(format!(
            "far-field exponent {} does not exceed 1/2; use the slow-decay formula",
            g.decay_exponent
        )));
    }
    if let Some(p) = psi.powers.iter().find(|p| p.exponent <= 0.5) {
        return Err(CrackError::Inversion(format!(
            "far-field exponent {} does not exceed 1/2; use the slow-decay formula",
            p.exponent
        )));
    }
    let mut phi = LineField::zeros(psi.mesh().clone());
    phi.powers = tan_powers(&psi.powers);
    if !is_zero(g) {
        let h = weighted(g, 0.5)?;
        let s = apply_s_s(&h, g.mesh.clone())?;
        let values = s
            .nodes()
            .iter()
            .zip(&s.values)
            .map(|(x, v)| -v / (-x).sqrt())
            .collect();
        let decay = (h.decay_exponent.min(1.0) + 0.5).min(g.decay_exponent);
        let tip = g.tip_exponent.max(0.5);
        phi.regular = GridFunction::new(g.mesh.clone(), values, tip, decay)?;
    }
    for m in &psi.masses {
        phi = phi.lin_comb(1.0, &invert_mass(psi, m.position, m.weight)?, 1.0)?;
    }
    for p in &psi.poles {
        let d = LineField::point_mass(psi.mesh().clone(), p.position, p.coefficient)?;
        phi = phi.lin_comb(1.0, &d, 1.0)?;
    }
    let (k0, k_infinity) = match asymptotic_constants(psi) {
        Ok((k0, kinf)) => (Some(k0), kinf),
        Err(CrackError::NotIntegrable(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(InversionResult {
        phi,
        k0,
        k_infinity,
        c0: None,
    })
}

fn check_spec(spec: &AsymptoticSpec) -> Result<()> {
    if spec.far_terms.is_empty() {
        return Err(CrackError::validation("far_terms", "at least one far-field term is required"));
    }
    for &(_, alpha) in &spec.far_terms {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(CrackError::validation(
                "far_terms",
                format!("exponent {alpha} is outside (0, 1/2)"),
            ));
        }
    }
    if !(spec.beta > 0.5) {
        return Err(CrackError::validation(
            "beta",
            format!("remainder decay {} must exceed 1/2", spec.beta),
        ));
    }
    if !(0.0..0.5).contains(&spec.alpha0) {
        return Err(CrackError::validation(
            "alpha0",
            format!("tip exponent {} is outside [0, 1/2)", spec.alpha0),
        ));
    }
    Ok(())
}

fn tan_powers(powers: &[PowerLaw]) -> Vec<PowerLaw> {
    powers
        .iter()
        .map(|p| PowerLaw {
            coefficient: (PI * p.exponent).tan() * p.coefficient,
            exponent: p.exponent,
        })
        .collect()
}

fn far_field(psi: &LineField, spec: &AsymptoticSpec) -> LineField {
    let mut f = LineField::zeros(psi.mesh().clone());
    f.powers = spec
        .far_terms
        .iter()
        .map(|&(coefficient, exponent)| PowerLaw {
            coefficient,
            exponent,
        })
        .collect();
    f
}

/// Inverse for right-hand sides with far-field terms `cⱼ(−x)^{−αⱼ}`,
/// `αⱼ ∈ (0, 1/2)`: `φ = Σ tan(παⱼ)cⱼ(−x)^{−αⱼ} + classic(ψ − ψ∞)`.
pub fn invert_slow_decay(psi: &LineField, spec: &AsymptoticSpec) -> Result<InversionResult> {
    check_spec(spec)?;
    check_rhs(psi)?;
    let far = far_field(psi, spec);
    let rem = psi.lin_comb(1.0, &far, -1.0)?;
    let classic = invert_classic(&rem)?;
    let mut power = far.clone();
    power.powers = tan_powers(&far.powers);
    let phi = classic.phi.lin_comb(1.0, &power, 1.0)?;
    Ok(InversionResult {
        phi,
        k0: classic.k0,
        k_infinity: None,
        c0: classic.k0.map(|k| -k),
    })
}

/// The equivalent slow-decay form
/// `φ = −C₀(−x)^{−1/2} − (1/π)∫√(x/ξ) ψ(ξ)/(x−ξ) dξ`.
pub fn invert_slow_decay_alt(psi: &LineField, c0: f64) -> Result<LineField> {
    check_rhs(psi)?;
    let mesh = psi.mesh().clone();
    let mut phi = LineField::from_regular(GridFunction::from_fn(mesh.clone(), 0.5, 0.5, |x| {
        -c0 / (-x).sqrt()
    })?);
    phi.powers = tan_powers(&psi.powers);
    let g = &psi.regular;
    if !is_zero(g) {
        let h = weighted(g, -0.5)?;
        let s = apply_s_s(&h, mesh.clone())?;
        let values = s
            .nodes()
            .iter()
            .zip(&s.values)
            .map(|(x, v)| -v * (-x).sqrt())
            .collect();
        let part = GridFunction::new(mesh.clone(), values, 0.5, g.decay_exponent)?;
        phi = phi.lin_comb(1.0, &LineField::from_regular(part), 1.0)?;
    }
    for m in &psi.masses {
        let a = -m.position;
        let w = m.weight;
        let mut part = LineField::from_regular(GridFunction::from_fn(mesh.clone(), 0.0, 0.5, |x| {
            w / (PI * (a + (-a * x).sqrt()))
        })?);
        part.poles.push(Pole {
            position: m.position,
            coefficient: -w,
        });
        phi = phi.lin_comb(1.0, &part, 1.0)?;
    }
    Ok(phi)
}
