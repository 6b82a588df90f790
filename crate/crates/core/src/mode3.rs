//! Antiplane (Mode III) solver.

use std::sync::Arc;

use crate::bimaterial::BimaterialConstants;
use crate::error::{CrackError, Result};
use crate::field::LineField;
use crate::inversion::{invert_classic, invert_slow_decay, InversionResult};
use crate::load::LoadSpec;
use crate::mesh::{GridFunction, SemiAxisMesh, Side};
use crate::sif::{extract_sif, SifEstimate};

/// Relative agreement demanded between the two SIF fits.
pub const SIF_RTOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Mode3Solution {
    /// `∂⟦u₃⟧/∂x₁`, including the poles carried by point loads.
    pub opening_derivative: LineField,
    /// `⟦u₃⟧` at the crack nodes, zero at the tip.
    pub opening: GridFunction,
    /// `⟨σ₂₃⟩` on the mesh ahead of the tip.
    pub traction_ahead: GridFunction,
    pub k_iii: f64,
    pub sif: SifEstimate,
    /// `K_III` implied by the inversion constant `K₀`, when defined.
    pub k_iii_from_k0: Option<f64>,
}

/// Right-hand side `⟨p₃⟩ + (η/2)⟦p₃⟧`.
pub fn mode3_rhs(load: &LoadSpec, mat: &BimaterialConstants, mesh: &Arc<SemiAxisMesh>) -> Result<LineField> {
    load.symmetric_part(2, mesh)?
        .lin_comb(1.0, &load.skew_part(2, mesh)?, 0.5 * mat.eta)
}

fn check_components(load: &LoadSpec) -> Result<()> {
    let in_plane = load.point_forces.iter().any(|p| p.force[0] != 0.0 || p.force[1] != 0.0)
        || load.density_sym[..2].iter().chain(&load.density_skew[..2]).any(Option::is_some);
    if in_plane {
        return Err(CrackError::validation(
            "load",
            "Mode III accepts only the x₃ component",
        ));
    }
    Ok(())
}

pub fn solve_mode3(
    load: &LoadSpec,
    mat: &BimaterialConstants,
    mesh: &Arc<SemiAxisMesh>,
    ahead: &Arc<SemiAxisMesh>,
) -> Result<Mode3Solution> {
    load.validate()?;
    check_components(load)?;
    let psi = mode3_rhs(load, mat, mesh)?;
    let inv: InversionResult = match &load.far_field {
        Some(spec) => invert_slow_decay(&psi, spec)?,
        None => invert_classic(&psi)?,
    };
    let compliance = mat.antiplane();
    let phi = inv.phi.scaled(-compliance);
    let opening = opening_of(&phi);
    let traction = traction_ahead(&phi, mat, ahead)?;
    let scale = load.length_scale().unwrap_or(1.0);
    let sif = extract_sif(&traction, scale, SIF_RTOL, 1e-12 * load_magnitude(load))?;
    // φ' ≈ −(b+e)K₀(−x)^{−1/2} near the tip, so σ ≈ K₀x^{−1/2}
    let k_iii_from_k0 = inv.k0.map(|k0| (2.0 * std::f64::consts::PI).sqrt() * k0);
    Ok(Mode3Solution {
        opening_derivative: phi,
        opening,
        traction_ahead: traction,
        k_iii: sif.value,
        sif,
        k_iii_from_k0,
    })
}

pub(crate) fn load_magnitude(load: &LoadSpec) -> f64 {
    let m = load
        .point_forces
        .iter()
        .flat_map(|p| p.force.iter())
        .fold(0.0f64, |m, f| m.max(f.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// `⟦u⟧(x) = −∫_x^0 φ'`, zero at the tip.
pub fn opening_of(phi: &LineField) -> GridFunction {
    GridFunction {
        mesh: phi.mesh().clone(),
        values: phi.cumulative_from_tip(),
        tip_exponent: 0.0,
        decay_exponent: 0.5,
    }
}

/// `⟨σ₂₃⟩^(+) = −(1/(b+e)) S^(c)[∂⟦u₃⟧/∂x₁]` at the nodes of `eval`.
pub fn traction_ahead(
    opening_derivative: &LineField,
    mat: &BimaterialConstants,
    eval: &Arc<SemiAxisMesh>,
) -> Result<GridFunction> {
    if eval.side() != Side::Positive {
        return Err(CrackError::Mesh("traction is evaluated ahead of the tip".into()));
    }
    let s = opening_derivative.cauchy_at(eval.nodes())?;
    let c = -1.0 / mat.antiplane();
    Ok(GridFunction {
        mesh: eval.clone(),
        values: s.into_iter().map(|v| c * v).collect(),
        tip_exponent: 0.5,
        decay_exponent: 1.5,
    })
}

/// Limit of `√(2πx)·σ` with the default tolerance.
pub fn sif_mode3(traction: &GridFunction, scale: f64) -> Result<f64> {
    Ok(extract_sif(traction, scale, SIF_RTOL, 1e-12)?.value)
}
