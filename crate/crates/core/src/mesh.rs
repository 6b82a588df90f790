//! Graded discretisations of the two semi-axes and sampled fields on them.
//!
//! A [`SemiAxisMesh`] covers either the crack faces `x₁ < 0` or the bonded
//! interface ahead of the tip `x₁ > 0`. It is truncated at `|x₁| = L` on the far
//! side and stops short of the tip; [`GridFunction`] carries power-law models
//! for both uncovered pieces so that integrals over the full semi-axis can be
//! closed analytically.

use std::sync::Arc;

use crate::error::{CrackError, Result};

/// Which semi-axis a mesh discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Crack faces, `x₁ < 0`.
    Negative,
    /// Interface ahead of the tip, `x₁ > 0`.
    Positive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiAxisMesh {
    nodes: Vec<f64>,
    side: Side,
    truncation_radius: f64,
    grading_ratio: f64,
}

const CLUSTER_WEIGHT: f64 = 0.3;
const CLUSTER_CORE: f64 = 0.02;

impl SemiAxisMesh {
    /// Wraps an explicit node list. Nodes must be strictly increasing and all on
    /// one side of the tip.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(CrackError::Mesh("at least two nodes are required".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(CrackError::Mesh("non-finite node".into()));
        }
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(CrackError::Mesh(format!(
                    "nodes must be strictly increasing ({} >= {})",
                    w[0], w[1]
                )));
            }
        }
        let side = if nodes[nodes.len() - 1] < 0.0 {
            Side::Negative
        } else if nodes[0] > 0.0 {
            Side::Positive
        } else {
            return Err(CrackError::Mesh(
                "nodes must lie strictly on one side of the tip".into(),
            ));
        };
        let (far, tip) = match side {
            Side::Negative => (-nodes[0], -nodes[nodes.len() - 1]),
            Side::Positive => (nodes[nodes.len() - 1], nodes[0]),
        };
        let ratio = (far / tip).powf(1.0 / (nodes.len() - 1) as f64);
        Ok(SemiAxisMesh {
            nodes,
            side,
            truncation_radius: far,
            grading_ratio: ratio.max(1.0 + f64::EPSILON),
        })
    }

    /// Uniform nodes `x₀ + k h` (no tip grading). Intended for tests and for
    /// smooth data supported away from the tip.
    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(CrackError::Mesh("at least two nodes are required".into()));
        }
        let h = (end - start) / (n - 1) as f64;
        Self::from_nodes((0..n).map(|k| start + h * k as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn grading_ratio(&self) -> f64 {
        self.grading_ratio
    }

    /// Index of the node closest to the tip.
    pub fn tip_index(&self) -> usize {
        match self.side {
            Side::Negative => self.nodes.len() - 1,
            Side::Positive => 0,
        }
    }

    /// Index of the node at the truncation radius.
    pub fn far_index(&self) -> usize {
        match self.side {
            Side::Negative => 0,
            Side::Positive => self.nodes.len() - 1,
        }
    }

    /// Distance from the tip to the nearest node.
    pub fn tip_gap(&self) -> f64 {
        self.nodes[self.tip_index()].abs()
    }

    /// Index of the node equal to `x`, if any.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.nodes
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
            .ok()
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if (x - self.nodes[i - 1]).abs() <= (self.nodes[i] - x).abs() {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Continues the far end geometrically with the mesh's grading ratio up to
    /// `radius`, for fields with unbounded support such as `S^(s)φ`.
    pub fn extended_to(&self, radius: f64) -> Result<SemiAxisMesh> {
        let l = self.truncation_radius;
        if !(radius > l) {
            return Err(CrackError::validation("radius", "must exceed the truncation radius"));
        }
        let r = self.grading_ratio;
        let mut far = Vec::new();
        let mut d = l * r;
        while d < radius {
            far.push(d);
            d *= r;
        }
        far.push(radius);
        let mut nodes: Vec<f64> = match self.side {
            Side::Negative => far.iter().rev().map(|d| -d).collect(),
            Side::Positive => Vec::new(),
        };
        nodes.extend_from_slice(&self.nodes);
        if self.side == Side::Positive {
            nodes.extend(far);
        }
        let mut m = SemiAxisMesh::from_nodes(nodes)?;
        m.grading_ratio = r;
        Ok(m)
    }

    /// Mirror image `x ↦ −x` (maps a crack-side mesh to an ahead-side mesh).
    pub fn mirrored(&self) -> SemiAxisMesh {
        let nodes: Vec<f64> = self.nodes.iter().rev().map(|x| -x).collect();
        SemiAxisMesh {
            nodes,
            side: match self.side {
                Side::Negative => Side::Positive,
                Side::Positive => Side::Negative,
            },
            truncation_radius: self.truncation_radius,
            grading_ratio: self.grading_ratio,
        }
    }
}

/// Builds an `n`-node mesh of `[-L, 0)` graded geometrically toward the tip,
/// with additional geometric refinement around each cluster point. Every
/// cluster point becomes a node. Without clusters the nodes are exactly
/// `−L·r^{−k}`, `k = 0..n−1`.
pub fn build_graded_mesh(
    truncation_radius: f64,
    n: usize,
    grading_ratio: f64,
    cluster_points: &[f64],
) -> Result<SemiAxisMesh> {
    let l = truncation_radius;
    if !(l.is_finite() && l > 0.0) {
        return Err(CrackError::validation("L", "truncation radius must be positive"));
    }
    if !(grading_ratio.is_finite() && grading_ratio > 1.0) {
        return Err(CrackError::validation("grading_ratio", "must exceed 1"));
    }
    let required = 16 + 8 * cluster_points.len();
    if n < required {
        return Err(CrackError::Mesh(format!(
            "{n} nodes cannot honour {} cluster points (need at least {required})",
            cluster_points.len()
        )));
    }
    let tip = l * grading_ratio.powf(-((n - 1) as f64));
    if !(tip > 0.0) {
        return Err(CrackError::Mesh("tip spacing underflows".into()));
    }
    let mut clusters: Vec<f64> = Vec::with_capacity(cluster_points.len());
    for &c in cluster_points {
        if !(c > -l && c < -tip) {
            return Err(CrackError::Mesh(format!(
                "cluster point {c} lies outside the meshed interval ({}, {})",
                -l, -tip
            )));
        }
        clusters.push(-c);
    }
    clusters.sort_by(|a, b| a.partial_cmp(b).unwrap());
    clusters.dedup();

    let mut dist: Vec<f64> = if clusters.is_empty() {
        (0..n)
            .map(|k| l * grading_ratio.powf(-(k as f64)))
            .collect()
    } else {
        let g = |s: f64| -> f64 {
            let mut v = s.ln();
            for &sc in &clusters {
                let core = CLUSTER_CORE * sc;
                let r = s - sc;
                v += CLUSTER_WEIGHT * r.signum() * (r.abs() / core).ln_1p();
            }
            v
        };
        let (g_far, g_tip) = (g(l), g(tip));
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let target = g_far - (g_far - g_tip) * k as f64 / (n - 1) as f64;
            let (mut lo, mut hi) = (tip.ln(), l.ln());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid.exp()) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            out.push((0.5 * (lo + hi)).exp());
        }
        out[0] = l;
        out[n - 1] = tip;
        for &sc in &clusters {
            let k = (1..n - 1)
                .min_by(|&i, &j| {
                    (out[i] - sc)
                        .abs()
                        .partial_cmp(&(out[j] - sc).abs())
                        .unwrap()
                })
                .unwrap();
            out[k] = sc;
        }
        out
    };
    let nodes: Vec<f64> = dist.drain(..).map(|s| -s).collect();
    let mut mesh = SemiAxisMesh::from_nodes(nodes)?;
    mesh.grading_ratio = grading_ratio;
    mesh.truncation_radius = l;
    Ok(mesh)
}

/// Mesh of `(0, L]` mirroring [`build_graded_mesh`] without clusters.
pub fn build_ahead_mesh(truncation_radius: f64, n: usize, grading_ratio: f64) -> Result<SemiAxisMesh> {
    Ok(build_graded_mesh(truncation_radius, n, grading_ratio, &[])?.mirrored())
}

/// Grading ratio giving a tip gap of `tip_fraction · L` with `n` nodes.
pub fn ratio_for_tip_fraction(n: usize, tip_fraction: f64) -> f64 {
    (1.0 / tip_fraction).powf(1.0 / (n - 1) as f64)
}

/// Samples on a mesh plus the power laws assumed on the uncovered pieces:
/// `f ≈ f_tip·(|x|/|x_tip|)^(−tip_exponent)` between the tip and the nearest
/// node, and `f ≈ f_far·(|x|/L)^(−decay_exponent)` beyond the truncation
/// radius. An infinite decay exponent means "no tail".
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub mesh: Arc<SemiAxisMesh>,
    pub values: Vec<f64>,
    pub tip_exponent: f64,
    pub decay_exponent: f64,
}

impl GridFunction {
    pub fn new(
        mesh: Arc<SemiAxisMesh>,
        values: Vec<f64>,
        tip_exponent: f64,
        decay_exponent: f64,
    ) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(CrackError::Mesh(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        if !(0.0..1.0).contains(&tip_exponent) {
            return Err(CrackError::validation(
                "tip_exponent",
                format!("must lie in [0, 1), got {tip_exponent}"),
            ));
        }
        if !(decay_exponent > 0.0) {
            return Err(CrackError::validation(
                "decay_exponent",
                format!("must be positive, got {decay_exponent}"),
            ));
        }
        Ok(GridFunction {
            mesh,
            values,
            tip_exponent,
            decay_exponent,
        })
    }

    pub fn from_fn(
        mesh: Arc<SemiAxisMesh>,
        tip_exponent: f64,
        decay_exponent: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&x| f(x)).collect();
        Self::new(mesh, values, tip_exponent, decay_exponent)
    }

    pub fn zeros(mesh: Arc<SemiAxisMesh>) -> Self {
        let n = mesh.len();
        GridFunction {
            mesh,
            values: vec![0.0; n],
            tip_exponent: 0.0,
            decay_exponent: f64::INFINITY,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    /// Coefficient `c` of the tip model `c·|x|^(−tip_exponent)`.
    pub fn tip_coefficient(&self) -> f64 {
        let i = self.mesh.tip_index();
        self.values[i] * self.mesh.nodes()[i].abs().powf(self.tip_exponent)
    }

    /// `a·self + b·other` on a shared mesh. The result keeps the weaker of the
    /// two tip and decay models.
    pub fn lin_comb(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if self.mesh != other.mesh {
            return Err(CrackError::Mesh("grid functions live on different meshes".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(GridFunction {
            mesh: self.mesh.clone(),
            values,
            tip_exponent: self.tip_exponent.max(other.tip_exponent),
            decay_exponent: self.decay_exponent.min(other.decay_exponent),
        })
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            tip_exponent: self.tip_exponent,
            decay_exponent: self.decay_exponent,
        }
    }

    /// Integral of the tip model over the gap between tip and nearest node.
    fn tip_integral(&self) -> f64 {
        let i = self.mesh.tip_index();
        self.values[i] * self.mesh.nodes()[i].abs() / (1.0 - self.tip_exponent)
    }

    fn tail_integral(&self) -> Result<f64> {
        let i = self.mesh.far_index();
        let v = self.values[i];
        if v == 0.0 || self.decay_exponent.is_infinite() {
            return Ok(0.0);
        }
        if self.decay_exponent <= 1.0 {
            return Err(CrackError::NotIntegrable(format!(
                "far-field decay exponent {} does not exceed 1",
                self.decay_exponent
            )));
        }
        Ok(v * self.mesh.truncation_radius() / (self.decay_exponent - 1.0))
    }

    /// Integrals over each cell `[x_j, x_{j+1}]`.
    pub fn cell_integrals(&self) -> Vec<f64> {
        cell_integrals(self.mesh.nodes(), &self.values)
    }
}

/// Per-cell integrals of the piecewise-quadratic reconstruction: on each cell
/// the two quadratics through the cell and one neighbour (left or right) are
/// averaged when both exist.
pub(crate) fn cell_integrals(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        return vec![0.5 * (x[1] - x[0]) * (f[0] + f[1])];
    }
    let g = 0.5 / 3f64.sqrt();
    let quad = |i0: usize, i1: usize, i2: usize, a: f64, b: f64| -> f64 {
        let h = b - a;
        let pts = [a + h * (0.5 - g), a + h * (0.5 + g)];
        let mut s = 0.0;
        for t in pts {
            let l0 = (t - x[i1]) * (t - x[i2]) / ((x[i0] - x[i1]) * (x[i0] - x[i2]));
            let l1 = (t - x[i0]) * (t - x[i2]) / ((x[i1] - x[i0]) * (x[i1] - x[i2]));
            let l2 = (t - x[i0]) * (t - x[i1]) / ((x[i2] - x[i0]) * (x[i2] - x[i1]));
            s += l0 * f[i0] + l1 * f[i1] + l2 * f[i2];
        }
        0.5 * h * s
    };
    (0..n - 1)
        .map(|j| {
            let (a, b) = (x[j], x[j + 1]);
            let left = (j > 0).then(|| quad(j - 1, j, j + 1, a, b));
            let right = (j + 2 < n).then(|| quad(j, j + 1, j + 2, a, b));
            match (left, right) {
                (Some(l), Some(r)) => 0.5 * (l + r),
                (Some(v), None) | (None, Some(v)) => v,
                (None, None) => unreachable!(),
            }
        })
        .collect()
}

/// Integral of `f` over its whole semi-axis, including the tip and tail models.
pub fn integrate(f: &GridFunction) -> Result<f64> {
    if f.tip_exponent >= 1.0 {
        return Err(CrackError::NotIntegrable("tip exponent must be below 1".into()));
    }
    let interior: f64 = f.cell_integrals().iter().sum();
    Ok(interior + f.tip_integral() + f.tail_integral()?)
}

/// Running integral from the tip: entry `k` is `∫` of `f` between the tip and
/// node `k` (signed as `∫_{x_k}^{0}` on the crack side, `∫_0^{x_k}` ahead).
pub fn integrate_from_tip(f: &GridFunction) -> Vec<f64> {
    let cells = f.cell_integrals();
    let n = f.values.len();
    let mut out = vec![0.0; n];
    match f.mesh.side() {
        Side::Negative => {
            let mut acc = f.tip_integral();
            out[n - 1] = acc;
            for j in (0..n - 1).rev() {
                acc += cells[j];
                out[j] = acc;
            }
        }
        Side::Positive => {
            let mut acc = f.tip_integral();
            out[0] = acc;
            for j in 0..n - 1 {
                acc += cells[j];
                out[j + 1] = acc;
            }
        }
    }
    out
}
