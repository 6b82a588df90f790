//! In-plane (Mode I/II) solver.
//!
//! Vectors are `[component 1, component 2]`; tractions are `[σ₂₁, σ₂₂]`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::bimaterial::BimaterialConstants;
use crate::error::{CrackError, Result};
use crate::field::{LineField, TipSingular};
use crate::inversion::invert_classic;
use crate::load::LoadSpec;
use crate::mesh::{GridFunction, SemiAxisMesh, Side};
use crate::mode3::{load_magnitude, opening_of};
use crate::sif::{extract_sif_plane, PlaneSif};
use crate::singular_ops::assemble_k;

pub type Pair = [LineField; 2];

/// Condition estimate above which the dense solve is refused.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Truncation radius, in units of the farthest load distance, for the
/// Fredholm path.
pub const FREDHOLM_FAR_FACTOR: f64 = 1e6;
/// Tip gap as a fraction of the truncation radius for the Fredholm path.
pub const FREDHOLM_TIP_FRACTION: f64 = 1e-13;

/// Relative agreement demanded between SIF fits of different degree.
pub const SIF_RTOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMatrices2 {
    pub r: Matrix2<f64>,
    pub i: Matrix2<f64>,
    pub e: Matrix2<f64>,
}

impl ConstantMatrices2 {
    pub fn new() -> Self {
        ConstantMatrices2 {
            r: Matrix2::new(-1.0, 0.0, 0.0, 1.0),
            i: Matrix2::identity(),
            e: Matrix2::new(0.0, 1.0, -1.0, 0.0),
        }
    }

    /// Largest entry of `E² + I` and `R² − I`.
    pub fn identity_defect(&self) -> f64 {
        let a = (self.e * self.e + self.i).abs().max();
        let b = (self.r * self.r - self.i).abs().max();
        a.max(b)
    }
}

impl Default for ConstantMatrices2 {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    I,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Identity,
    SingularS,
    SingularC,
}

/// `scalar · matrix · operator`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorTerm {
    pub scalar: f64,
    pub matrix: MatrixKind,
    pub operator: OperatorKind,
}

impl OperatorTerm {
    fn new(scalar: f64, matrix: MatrixKind, operator: OperatorKind) -> Self {
        OperatorTerm {
            scalar,
            matrix,
            operator,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneOperatorSpec {
    pub a_s: Vec<OperatorTerm>,
    pub b_s: Vec<OperatorTerm>,
    pub a_c: Vec<OperatorTerm>,
    pub b_c: Vec<OperatorTerm>,
}

pub fn assemble_plane_operators(mat: &BimaterialConstants) -> PlaneOperatorSpec {
    use MatrixKind::*;
    use OperatorKind::*;
    let (b, d, al, ga) = (mat.b, mat.d, mat.alpha, mat.gamma);
    let den = mat.plane_det();
    let h = b / (2.0 * den);
    PlaneOperatorSpec {
        a_s: vec![
            OperatorTerm::new(h * (b * al - d * ga), I, Identity),
            OperatorTerm::new(h * (d * al - b * ga), E, SingularS),
        ],
        b_s: vec![
            OperatorTerm::new(-b / den, I, SingularS),
            OperatorTerm::new(d / den, E, Identity),
        ],
        a_c: vec![OperatorTerm::new(h * (d * al - b * ga), E, SingularC)],
        b_c: vec![OperatorTerm::new(-b / den, I, SingularC)],
    }
}

fn e_times(v: &Pair) -> Pair {
    [v[1].clone(), v[0].scaled(-1.0)]
}

fn pair_comb(a: f64, u: &Pair, b: f64, v: &Pair) -> Result<Pair> {
    Ok([u[0].lin_comb(a, &v[0], b)?, u[1].lin_comb(a, &v[1], b)?])
}

fn zero_pair(mesh: &Arc<SemiAxisMesh>) -> Pair {
    [LineField::zeros(mesh.clone()), LineField::zeros(mesh.clone())]
}

/// Applies crack-side terms (identity or `S^(s)`) to a vector field.
pub fn apply_terms(terms: &[OperatorTerm], v: &Pair) -> Result<Pair> {
    let mut out = zero_pair(v[0].mesh());
    for t in terms {
        if t.scalar == 0.0 {
            continue;
        }
        let w = match t.operator {
            OperatorKind::Identity => v.clone(),
            OperatorKind::SingularS => [v[0].s_s()?, v[1].s_s()?],
            OperatorKind::SingularC => {
                return Err(CrackError::Unsupported(
                    "S^(c) terms are evaluated ahead of the tip".into(),
                ))
            }
        };
        let w = match t.matrix {
            MatrixKind::I => w,
            MatrixKind::E => e_times(&w),
        };
        out = pair_comb(1.0, &out, t.scalar, &w)?;
    }
    Ok(out)
}

/// Applies `S^(c)` terms at points ahead of the tip.
pub fn apply_terms_ahead(terms: &[OperatorTerm], v: &Pair, eval: &[f64]) -> Result<[Vec<f64>; 2]> {
    let mut out = [vec![0.0; eval.len()], vec![0.0; eval.len()]];
    for t in terms {
        if t.operator != OperatorKind::SingularC {
            return Err(CrackError::Unsupported("only S^(c) terms act ahead of the tip".into()));
        }
        if t.scalar == 0.0 {
            continue;
        }
        let s = [v[0].cauchy_at(eval)?, v[1].cauchy_at(eval)?];
        let s = match t.matrix {
            MatrixKind::I => s,
            MatrixKind::E => [s[1].clone(), s[0].iter().map(|x| -x).collect()],
        };
        for c in 0..2 {
            for (o, x) in out[c].iter_mut().zip(&s[c]) {
                *o += t.scalar * x;
            }
        }
    }
    Ok(out)
}

fn load_pairs(load: &LoadSpec, mesh: &Arc<SemiAxisMesh>) -> Result<(Pair, Pair)> {
    load.validate()?;
    if load.point_forces.iter().any(|p| p.force[2] != 0.0)
        || load.density_sym[2].is_some()
        || load.density_skew[2].is_some()
    {
        return Err(CrackError::validation("load", "Mode I/II accepts only x₁, x₂ components"));
    }
    let sym = [load.symmetric_part(0, mesh)?, load.symmetric_part(1, mesh)?];
    let skew = [load.skew_part(0, mesh)?, load.skew_part(1, mesh)?];
    Ok((sym, skew))
}

/// Left-hand side of the coupled system, `⟨p⟩ + 𝓐^(s)⟦p⟧`.
pub fn coupled_rhs(spec: &PlaneOperatorSpec, sym: &Pair, skew: &Pair) -> Result<Pair> {
    pair_comb(1.0, sym, 1.0, &apply_terms(&spec.a_s, skew)?)
}

#[derive(Debug, Clone)]
pub struct Mode12Solution {
    /// `∂⟦u⟧/∂x₁`, with poles and point masses carried exactly.
    pub opening_derivative: Pair,
    pub opening: [GridFunction; 2],
    /// `[⟨σ₂₁⟩, ⟨σ₂₂⟩]` ahead of the tip.
    pub traction_ahead: [GridFunction; 2],
    pub k_i: f64,
    pub k_ii: f64,
    pub sif: PlaneSif,
    /// Estimate of the 1-norm condition number of `I − pK` (Fredholm path).
    pub condition_estimate: Option<f64>,
}

/// Oscillation index `ε = (1/2π) ln((b+d)/(b−d))`.
pub fn oscillation_index(mat: &BimaterialConstants) -> f64 {
    ((mat.b + mat.d) / (mat.b - mat.d)).ln() / (2.0 * std::f64::consts::PI)
}

/// `⟨σ₂⟩^(+) = 𝓑^(c)∂⟦u⟧/∂x₁ − 𝓐^(c)⟦p⟧` at the nodes of `eval`.
pub fn traction_ahead(
    spec: &PlaneOperatorSpec,
    phi: &Pair,
    skew: &Pair,
    eval: &Arc<SemiAxisMesh>,
) -> Result<[GridFunction; 2]> {
    if eval.side() != Side::Positive {
        return Err(CrackError::Mesh("traction is evaluated ahead of the tip".into()));
    }
    let x = eval.nodes();
    let b = apply_terms_ahead(&spec.b_c, phi, x)?;
    let a = apply_terms_ahead(&spec.a_c, skew, x)?;
    let make = |c: usize| GridFunction {
        mesh: eval.clone(),
        values: b[c].iter().zip(&a[c]).map(|(u, v)| u - v).collect(),
        tip_exponent: 0.5,
        decay_exponent: 1.5,
    };
    Ok([make(0), make(1)])
}

fn finish(
    phi: Pair,
    skew: &Pair,
    load: &LoadSpec,
    mat: &BimaterialConstants,
    ahead: &Arc<SemiAxisMesh>,
    condition_estimate: Option<f64>,
) -> Result<Mode12Solution> {
    let spec = assemble_plane_operators(mat);
    let traction = traction_ahead(&spec, &phi, skew, ahead)?;
    let scale = load.length_scale().unwrap_or(1.0);
    let sif = extract_sif_plane(
        &traction[0],
        &traction[1],
        oscillation_index(mat),
        scale,
        SIF_RTOL,
        1e-12 * load_magnitude(load),
    )?;
    Ok(Mode12Solution {
        opening: [opening_of(&phi[0]), opening_of(&phi[1])],
        opening_derivative: phi,
        traction_ahead: traction,
        k_i: sif.k_i.value,
        k_ii: sif.k_ii.value,
        sif,
        condition_estimate,
    })
}

/// `d = 0`: `−(1/b)S^(s)φ' = g` componentwise, so `φ' = −b·S⁻¹g`.
pub fn solve_decoupled_d0(
    load: &LoadSpec,
    mat: &BimaterialConstants,
    mesh: &Arc<SemiAxisMesh>,
    ahead: &Arc<SemiAxisMesh>,
) -> Result<Mode12Solution> {
    if mat.d != 0.0 {
        return Err(CrackError::Unsupported(format!(
            "decoupled path requires d = 0, got {}",
            mat.d
        )));
    }
    let (sym, skew) = load_pairs(load, mesh)?;
    let g = coupled_rhs(&assemble_plane_operators(mat), &sym, &skew)?;
    let tips = tip_terms(mesh, tip_constant(&g, mat)?, 0.0, tip_scale(load));
    let phi = [
        split_tip(&invert_classic(&g[0])?.phi.scaled(-mat.b), &tips[0])?,
        split_tip(&invert_classic(&g[1])?.phi.scaled(-mat.b), &tips[1])?,
    ];
    finish(phi, &skew, load, mat, ahead, None)
}

fn tip_scale(load: &LoadSpec) -> f64 {
    load.length_scale().unwrap_or(1.0)
}

/// `C(−x)^{−β}ℓ/(ℓ−x)` as exact tip terms: its real part in component 1 and
/// imaginary part in component 2.
fn tip_terms(mesh: &Arc<SemiAxisMesh>, c: [f64; 2], epsilon: f64, scale: f64) -> Pair {
    let z = num_complex::Complex64::new(c[0], c[1]);
    let make = |coefficient| {
        let mut f = LineField::zeros(mesh.clone());
        f.tips.push(TipSingular {
            coefficient,
            epsilon,
            scale,
        });
        f
    };
    [make(z), make(z * num_complex::Complex64::new(0.0, -1.0))]
}

/// Moves the tip singularity out of the sampled part of `phi`, leaving a
/// bounded remainder.
fn split_tip(phi: &LineField, tip: &LineField) -> Result<LineField> {
    let t = tip.values_at_nodes()?;
    let g = &phi.regular;
    let values = g.values.iter().zip(&t).map(|(v, t)| v - t).collect();
    let mut out = phi.clone();
    out.regular = GridFunction::new(g.mesh.clone(), values, 0.0, g.decay_exponent)?;
    out.lin_comb(1.0, tip, 1.0)
}

/// `(1 − pK)∂⟦u⟧/∂x₁ = rhs`, componentwise.
#[derive(Debug, Clone)]
pub struct FredholmSystem {
    pub p: f64,
    pub rhs: Pair,
    /// `C` in `∂⟦u⟧/∂x₁ ≈ C(−x)^{−1/2−iε}` at the tip, as `[Re, Im]`.
    pub tip_constant: [f64; 2],
    pub mat: BimaterialConstants,
    pub load: LoadSpec,
    pub skew: Pair,
}

/// Applies `𝓡 = bS^(s) + dE` to the coupled system:
/// `rhs = ½{bαS^(s) + E[bγ + p(dα − bγ)K]}⟦p⟧ + (bS^(s) + dE)⟨p⟩`.
pub fn decouple_general(
    load: &LoadSpec,
    mat: &BimaterialConstants,
    mesh: &Arc<SemiAxisMesh>,
) -> Result<FredholmSystem> {
    let (sym, skew) = load_pairs(load, mesh)?;
    let (b, d, p) = (mat.b, mat.d, mat.p);
    let s_sym = [sym[0].s_s()?, sym[1].s_s()?];
    let mut rhs = pair_comb(b, &s_sym, d, &e_times(&sym))?;
    let has_skew = skew.iter().any(|f| !f.masses.is_empty() || !f.poles.is_empty() || !f.regular.values.iter().all(|v| *v == 0.0));
    if has_skew {
        let s_skew = [skew[0].s_s()?, skew[1].s_s()?];
        let k_skew = [skew[0].k()?, skew[1].k()?];
        let inner = pair_comb(b * mat.gamma, &skew, p * (d * mat.alpha - b * mat.gamma), &k_skew)?;
        let part = pair_comb(0.5 * b * mat.alpha, &s_skew, 0.5, &e_times(&inner))?;
        rhs = pair_comb(1.0, &rhs, 1.0, &part)?;
    }
    let g = coupled_rhs(&assemble_plane_operators(mat), &sym, &skew)?;
    Ok(FredholmSystem {
        p,
        rhs,
        tip_constant: tip_constant(&g, mat)?,
        mat: *mat,
        load: load.clone(),
        skew,
    })
}

/// `C = (b/π)∫(−ξ)^{−1/2+iε} ĝ dξ` with `ĝ = g₁ + ig₂`, the tip amplitude of
/// the bounded-energy solution of the coupled system. Poles contribute
/// through `PV∫₀^∞ t^{s−1}/(a−t) dt = πa^{s−1}cot(πs)`, `cot(π/2 + iπε) = −iκ`.
pub fn tip_constant(g: &Pair, mat: &BimaterialConstants) -> Result<[f64; 2]> {
    use num_complex::Complex64 as C;
    let eps = oscillation_index(mat);
    let kappa = mat.d / mat.b;
    let phase = |t: f64| C::from_polar(t.powf(-0.5), eps * t.ln());
    let mut total = C::new(0.0, 0.0);
    let (g1, g2) = (&g[0].regular, &g[1].regular);
    if g1.values.iter().chain(&g2.values).any(|v| *v != 0.0) {
        if g1.mesh != g2.mesh || g1.tip_exponent.max(g2.tip_exponent) >= 0.5 {
            return Err(CrackError::NotIntegrable("tip constant of the load".into()));
        }
        let w: Vec<C> = g1.nodes().iter().map(|x| phase(-x)).collect();
        let part = |f: &dyn Fn(usize) -> f64| -> Result<f64> {
            let values = (0..w.len()).map(f).collect();
            crate::mesh::integrate(&GridFunction::new(
                g1.mesh.clone(),
                values,
                g1.tip_exponent.max(g2.tip_exponent) + 0.5,
                g1.decay_exponent.min(g2.decay_exponent) + 0.5,
            )?)
        };
        let re = part(&|i| w[i].re * g1.values[i] - w[i].im * g2.values[i])?;
        let im = part(&|i| w[i].im * g1.values[i] + w[i].re * g2.values[i])?;
        total += C::new(re, im);
    }
    for (c, f) in g.iter().enumerate() {
        let unit = if c == 0 { C::new(1.0, 0.0) } else { C::new(0.0, 1.0) };
        if !f.powers.is_empty() {
            return Err(CrackError::NotIntegrable("tip constant with global power laws".into()));
        }
        for m in &f.masses {
            total += unit * m.weight * phase(-m.position);
        }
        for p in &f.poles {
            total += unit * p.coefficient * phase(-p.position) * C::new(0.0, -kappa);
        }
    }
    let c = total * (mat.b / std::f64::consts::PI);
    Ok([c.re, c.im])
}

fn singular_part(f: &LineField) -> Result<LineField> {
    if !f.powers.is_empty() {
        return Err(CrackError::Unsupported(
            "global power laws in the Fredholm right-hand side".into(),
        ));
    }
    let mut s = LineField::zeros(f.mesh().clone());
    s.masses = f.masses.clone();
    s.poles = f.poles.clone();
    Ok(s)
}

fn norm1(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Near-null direction of `A` by inverse iteration; returns the vector and
/// the largest observed growth `‖A⁻¹v‖₁/‖v‖₁`.
fn inverse_iteration(
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    start: DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    let mut v = &start / norm1(&start);
    let mut growth = 0.0f64;
    for _ in 0..6 {
        let w = lu.solve(&v).ok_or(CrackError::Singular)?;
        let n = norm1(&w);
        growth = growth.max(n);
        v = w / n;
    }
    Ok((v, growth))
}

/// Dense solve of the decoupled system.
///
/// The point-load singularities and the tip term `C(−x)^{−β}` of the
/// bounded-energy solution are carried exactly and the dense system is solved
/// for the bounded remainder, which excludes the `(−x)^{−1/2±iε}` solutions
/// of the homogeneous equation. Should the discrete operator still show a
/// near-null direction, its amplitude is fixed by requiring `√(−x)` times the
/// remainder to vanish at the tip. The truncation error decays like `1/L`;
/// use a mesh truncated far from the load (see [`FREDHOLM_FAR_FACTOR`]).
pub fn solve_fredholm(system: &FredholmSystem, ahead: &Arc<SemiAxisMesh>) -> Result<Mode12Solution> {
    let mesh = system.rhs[0].mesh().clone();
    let n = mesh.len();
    let p = system.p;
    let eps = oscillation_index(&system.mat);
    let tips = tip_terms(&mesh, system.tip_constant, eps, tip_scale(&system.load));
    let mut known = Vec::with_capacity(2);
    let mut f = Vec::with_capacity(2);
    for c in 0..2 {
        let u = singular_part(&system.rhs[c])?.lin_comb(1.0, &tips[c], 1.0)?;
        let applied = u.lin_comb(1.0, &u.k()?, -p)?;
        let rest = system.rhs[c].lin_comb(1.0, &applied, -1.0)?;
        if !rest.masses.is_empty() || !rest.poles.is_empty() {
            return Err(CrackError::Unsupported("unbalanced point singularities".into()));
        }
        f.push(DVector::from_vec(rest.values_at_nodes()?));
        known.push(u);
    }
    let (y, condition) = if p == 0.0 {
        (f, 1.0)
    } else {
        let k = assemble_k(mesh.clone(), 0.0, 1.0, mesh.nodes())?;
        let a = DMatrix::identity(n, n) - k.entries * p;
        let a_norm = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let lu = a.lu();
        let start = DVector::from_iterator(n, mesh.nodes().iter().map(|x| (-x).powf(-0.5)));
        let (null, growth) = inverse_iteration(&lu, start)?;
        let mut y = Vec::with_capacity(2);
        let mut growth_all = growth;
        for fc in &f {
            let sol = lu.solve(fc).ok_or(CrackError::Singular)?;
            if norm1(fc) > 0.0 {
                growth_all = growth_all.max(norm1(&sol) / norm1(fc));
            }
            y.push(sol);
        }
        let condition = a_norm * growth_all;
        if !(condition < CONDITION_LIMIT) {
            return Err(CrackError::IllConditioned { estimate: condition });
        }
        if growth > NULL_GROWTH {
            let scale = tip_scale(&system.load);
            for yc in y.iter_mut() {
                deflate(&mesh, yc, &null, scale)?;
            }
        }
        (y, condition)
    };
    let mut phi = Vec::with_capacity(2);
    for (u, yc) in known.into_iter().zip(y) {
        let g = GridFunction::new(mesh.clone(), yc.iter().cloned().collect(), 0.0, 1.0)?;
        phi.push(u.lin_comb(1.0, &LineField::from_regular(g), 1.0)?);
    }
    let phi: Pair = [phi[0].clone(), phi[1].clone()];
    finish(phi, &system.skew, &system.load, &system.mat, ahead, Some(condition))
}

/// Inverse-iteration growth above which `I − pK` is treated as having a
/// near-null direction.
const NULL_GROWTH: f64 = 1e4;

/// Tip window, relative to the load length scale, used to fix the
/// null-space amplitude.
const TIP_WINDOW: f64 = 1e-5;

/// Removes the null direction from `y` so that `√(−x)·y` vanishes at the tip
/// in the least-squares sense.
fn deflate(mesh: &SemiAxisMesh, y: &mut DVector<f64>, null: &DVector<f64>, scale: f64) -> Result<()> {
    let x = mesh.nodes();
    let (mut num, mut den, mut count) = (0.0, 0.0, 0);
    for i in 0..mesh.len().saturating_sub(3) {
        if x[i] < -TIP_WINDOW * scale {
            continue;
        }
        let w = -x[i];
        num -= w * null[i] * y[i];
        den += w * null[i] * null[i];
        count += 1;
    }
    if count < 4 || den == 0.0 {
        return Err(CrackError::Mesh("too few tip nodes to fix the null direction".into()));
    }
    *y += null * (num / den);
    Ok(())
}

/// General path: decouple, then solve densely.
pub fn solve_general(
    load: &LoadSpec,
    mat: &BimaterialConstants,
    mesh: &Arc<SemiAxisMesh>,
    ahead: &Arc<SemiAxisMesh>,
) -> Result<Mode12Solution> {
    solve_fredholm(&decouple_general(load, mat, mesh)?, ahead)
}

/// Jumps `⟦u⟧(p⁻) − ⟦u⟧(p⁺)` of the opening across the load point `p`.
pub fn opening_jumps(solution: &Mode12Solution, position: f64) -> [f64; 2] {
    let jump = |f: &LineField| -> f64 {
        -f.masses
            .iter()
            .filter(|m| m.position == position)
            .map(|m| m.weight)
            .sum::<f64>()
    };
    [jump(&solution.opening_derivative[0]), jump(&solution.opening_derivative[1])]
}

/// Residual of the coupled system `𝓑^(s)φ' − ⟨p⟩ − 𝓐^(s)⟦p⟧`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledResidual {
    /// Max-norm of the pointwise part in units of `F/a`, with `F` the largest
    /// load component and `a` the load length scale.
    pub regular: f64,
    /// Largest point-mass or pole coefficient mismatch, relative to `F`.
    pub singular: f64,
}

impl CoupledResidual {
    pub fn max(&self) -> f64 {
        self.regular.max(self.singular)
    }
}

/// Evaluates the coupled residual, skipping `exclude_cells` cells on each
/// side of every load point.
pub fn coupled_residual(
    phi: &Pair,
    load: &LoadSpec,
    mat: &BimaterialConstants,
    exclude_cells: usize,
) -> Result<CoupledResidual> {
    let mesh = phi[0].mesh().clone();
    let spec = assemble_plane_operators(mat);
    let (sym, skew) = load_pairs(load, &mesh)?;
    let g = coupled_rhs(&spec, &sym, &skew)?;
    let lhs = apply_terms(&spec.b_s, phi)?;
    let x = mesh.nodes();
    let mut skip = vec![false; x.len()];
    for pos in load.positions() {
        let k = mesh.nearest_index(pos);
        let lo = k.saturating_sub(exclude_cells);
        let hi = (k + exclude_cells).min(x.len() - 1);
        for s in skip.iter_mut().take(hi + 1).skip(lo) {
            *s = true;
        }
    }
    let mut reg = 0.0f64;
    let mut sing = 0.0f64;
    for c in 0..2 {
        let mut r = lhs[c].lin_comb(1.0, &g[c], -1.0)?;
        for m in &r.masses {
            sing = sing.max(m.weight.abs());
        }
        for p in &r.poles {
            sing = sing.max(p.coefficient.abs());
        }
        r.masses.clear();
        r.poles.clear();
        for (v, s) in r.values_at_nodes()?.iter().zip(&skip) {
            if !s {
                reg = reg.max(v.abs());
            }
        }
    }
    let f = load_magnitude(load);
    Ok(CoupledResidual {
        regular: reg * tip_scale(load) / f,
        singular: sing / f,
    })
}
