//! Crack-face loading: point forces plus optional tabulated densities.

use std::sync::Arc;

use crate::error::{CrackError, Result};
use crate::field::LineField;
use crate::inversion::AsymptoticSpec;
use crate::mesh::{GridFunction, SemiAxisMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Equal and opposite forces on the two faces: `⟨p⟩ = −F δ(x+a)`.
    Symmetric,
    /// Equal forces in the same direction: `⟦p⟧ = −2F δ(x+a)`.
    Skew,
}

/// Pair of point forces a distance `distance` behind the tip. `force` holds
/// the components along `x₁, x₂, x₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointForce {
    pub distance: f64,
    pub force: [f64; 3],
    pub symmetry: Symmetry,
}

#[derive(Debug, Clone, Default)]
pub struct LoadSpec {
    pub point_forces: Vec<PointForce>,
    /// `⟨p_j⟩` densities on the crack faces.
    pub density_sym: [Option<GridFunction>; 3],
    /// `⟦p_j⟧` densities on the crack faces.
    pub density_skew: [Option<GridFunction>; 3],
    /// Far-field description of the Mode III right-hand side when it decays
    /// no faster than `(−x)^{−1/2}`.
    pub far_field: Option<AsymptoticSpec>,
}

impl LoadSpec {
    pub fn point(distance: f64, force: [f64; 3], symmetry: Symmetry) -> Self {
        LoadSpec {
            point_forces: vec![PointForce {
                distance,
                force,
                symmetry,
            }],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.point_forces.iter().enumerate() {
            if !(p.distance > 0.0) || !p.distance.is_finite() {
                return Err(CrackError::validation(
                    format!("load.point[{i}].position"),
                    format!("must be a positive distance behind the tip, got {}", p.distance),
                ));
            }
            if p.force.iter().any(|f| !f.is_finite()) {
                return Err(CrackError::validation(
                    format!("load.point[{i}]"),
                    "force components must be finite",
                ));
            }
        }
        for g in self.density_sym.iter().chain(&self.density_skew).flatten() {
            if g.mesh.nodes().iter().any(|&x| x >= 0.0) {
                return Err(CrackError::validation(
                    "load.density",
                    "densities must be supported on x < 0",
                ));
            }
        }
        Ok(())
    }

    /// Load application points, as negative abscissae.
    pub fn positions(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.point_forces.iter().map(|p| -p.distance).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// Smallest distance from the tip at which the load acts.
    pub fn length_scale(&self) -> Option<f64> {
        let mut s = f64::INFINITY;
        for p in &self.point_forces {
            s = s.min(p.distance);
        }
        for g in self.density_sym.iter().chain(&self.density_skew).flatten() {
            let x = g.nodes();
            let tip = g.mesh.tip_index();
            let near = if g.values[tip] != 0.0 {
                x[tip].abs()
            } else {
                x.iter()
                    .zip(&g.values)
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(x, _)| x.abs())
                    .fold(f64::INFINITY, f64::min)
            };
            s = s.min(near);
        }
        s.is_finite().then_some(s)
    }

    /// Largest distance from the tip at which the load acts.
    pub fn farthest(&self) -> Option<f64> {
        self.point_forces
            .iter()
            .map(|p| p.distance)
            .fold(None, |m, d| Some(m.map_or(d, |m: f64| m.max(d))))
    }

    fn field(&self, j: usize, symmetry: Symmetry, mesh: &Arc<SemiAxisMesh>) -> Result<LineField> {
        let density = match symmetry {
            Symmetry::Symmetric => &self.density_sym[j],
            Symmetry::Skew => &self.density_skew[j],
        };
        let mut f = match density {
            Some(g) if g.mesh == *mesh => LineField::from_regular(g.clone()),
            Some(_) => {
                return Err(CrackError::Mesh(
                    "load density is not sampled on the solution mesh".into(),
                ))
            }
            None => LineField::zeros(mesh.clone()),
        };
        let factor = match symmetry {
            Symmetry::Symmetric => -1.0,
            Symmetry::Skew => -2.0,
        };
        for p in self.point_forces.iter().filter(|p| p.symmetry == symmetry) {
            if p.force[j] != 0.0 {
                let d = LineField::point_mass(mesh.clone(), -p.distance, factor * p.force[j])?;
                f = f.lin_comb(1.0, &d, 1.0)?;
            }
        }
        Ok(f)
    }

    /// `⟨p_j⟩` on the mesh (component index 0, 1, 2).
    pub fn symmetric_part(&self, j: usize, mesh: &Arc<SemiAxisMesh>) -> Result<LineField> {
        self.field(j, Symmetry::Symmetric, mesh)
    }

    /// `⟦p_j⟧` on the mesh.
    pub fn skew_part(&self, j: usize, mesh: &Arc<SemiAxisMesh>) -> Result<LineField> {
        self.field(j, Symmetry::Skew, mesh)
    }
}

impl LoadSpec {
    /// Crack and ahead meshes suited to this load: truncation at
    /// `1000·` the farthest load distance, tip gap `10⁻¹⁰·L`, load points as
    /// cluster nodes. Densities fix the crack mesh to their own.
    pub fn solver_meshes(&self, n: usize) -> Result<(Arc<SemiAxisMesh>, Arc<SemiAxisMesh>)> {
        self.solver_meshes_with(n, FAR_FACTOR, TIP_FRACTION)
    }

    /// As [`LoadSpec::solver_meshes`] with explicit truncation factor and
    /// tip fraction.
    pub fn solver_meshes_with(
        &self,
        n: usize,
        far_factor: f64,
        tip_fraction: f64,
    ) -> Result<(Arc<SemiAxisMesh>, Arc<SemiAxisMesh>)> {
        let sampled = self
            .density_sym
            .iter()
            .chain(&self.density_skew)
            .flatten()
            .next()
            .map(|g| g.mesh.clone());
        let crack = match sampled {
            Some(m) => m,
            None => {
                let l = far_factor * self.farthest().unwrap_or(1.0);
                let ratio = crate::mesh::ratio_for_tip_fraction(n, tip_fraction);
                Arc::new(crate::mesh::build_graded_mesh(l, n, ratio, &self.positions())?)
            }
        };
        let l = crack.truncation_radius();
        let ratio = crate::mesh::ratio_for_tip_fraction(n, tip_fraction);
        let ahead = Arc::new(crate::mesh::build_ahead_mesh(l, n, ratio)?);
        Ok((crack, ahead))
    }
}

const FAR_FACTOR: f64 = 1000.0;
const TIP_FRACTION: f64 = 1e-10;
