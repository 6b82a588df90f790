//! Discretised Cauchy and Fredholm operators on the crack line.
//!
//! All operators act on a [`GridFunction`] read as a piecewise-linear
//! interpolant between nodes, a power law `c(−ξ)^{−τ}` between the tip and the
//! nearest node, and a power law beyond the truncation radius. Each row of an
//! operator is a weight vector over the source nodes; the tip and tail segments
//! load the tip and far node columns.
//!
//! * `S^(s)φ(x) = (1/π) PV∫ φ(ξ)/(x−ξ) dξ` for `x < 0`
//! * `S^(c)φ(x) = (1/π) ∫ φ(ξ)/(x−ξ) dξ` for `x > 0`
//! * `Kφ(x) = (1/π²) ∫ ln|ξ/x|/(x−ξ) φ(ξ) dξ` for `x < 0`

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{CrackError, Result};
use crate::mesh::{GridFunction, SemiAxisMesh, Side};
use crate::quadrature::{gauss4, graded_unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `S^(s)` or `S^(c)` depending on the side of the evaluation point.
    Cauchy,
    /// The compact operator `K`.
    Fredholm,
}

/// Dense operator: `entries[(i, j)]` is the weight of source node `j` in the
/// value at `rows[i]`. Valid only for sources with the recorded exponents.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kernel: Kernel,
    pub rows: Vec<f64>,
    pub cols: Arc<SemiAxisMesh>,
    pub tip_exponent: f64,
    pub decay_exponent: f64,
    pub entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn apply(&self, phi: &GridFunction) -> Result<Vec<f64>> {
        if phi.mesh != self.cols
            || phi.tip_exponent != self.tip_exponent
            || phi.decay_exponent != self.decay_exponent
        {
            return Err(CrackError::Mesh(
                "grid function does not match the operator's source model".into(),
            ));
        }
        let v = nalgebra::DVector::from_column_slice(&phi.values);
        Ok((&self.entries * v).iter().copied().collect())
    }
}

/// Weights of `∫_a^b ℓ(ξ)/(x−ξ) dξ` on the two end values of a linear `ℓ`.
/// At `x = a` or `x = b` the divergent `ln 0` term is dropped; these cancel
/// between neighbouring cells, which gives the principal value.
fn cauchy_cell(x: f64, a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    if x == a {
        let lc = -h.ln();
        return (lc + 1.0, -1.0);
    }
    if x == b {
        let lc = h.ln();
        return (1.0, lc - 1.0);
    }
    let t = (x - a) / h;
    if t.abs() > 10.0 {
        let v = 1.0 / t;
        let (mut wa, mut wb) = (0.0, 0.0);
        let mut vk = 1.0;
        for k in 1..=24 {
            vk *= v;
            let k = k as f64;
            wa += vk / (k * (k + 1.0));
            wb += vk / (k + 1.0);
        }
        return (wa, wb);
    }
    let lc = t.abs().ln() - (t - 1.0).abs().ln();
    ((1.0 - t) * lc + 1.0, t * lc - 1.0)
}

/// `ln(s/X)/(s−X)` with its removable value `1/X` at `s = X`.
fn log_kernel(s: f64, big_x: f64) -> f64 {
    let u = (s - big_x) / big_x;
    if u.abs() < 1e-8 {
        (1.0 - 0.5 * u) / big_x
    } else if u.abs() < 0.5 {
        u.ln_1p() / (s - big_x)
    } else {
        (s / big_x).ln() / (s - big_x)
    }
}

/// Integral of `w^{δ−1} g(w)` over (0, 1], handling the power singularity by
/// `w = v^{1/δ}` when `δ < 1`.
fn power_weighted(delta: f64, g: impl Fn(f64) -> f64) -> f64 {
    if delta < 1.0 {
        graded_unit(|v| g(v.powf(1.0 / delta))) / delta
    } else {
        graded_unit(|w| w.powf(delta - 1.0) * g(w))
    }
}

/// `∫_0^ε s^{−τ} g(s) ds`, with `s = εv^m`, `m = 1/(1−τ)` for `τ > 0`.
fn tip_integral(eps: f64, tau: f64, g: impl Fn(f64) -> f64) -> f64 {
    let m = if tau > 0.0 { 1.0 / (1.0 - tau) } else { 1.0 };
    let p = m * (1.0 - tau) - 1.0;
    eps.powf(1.0 - tau) * m * graded_unit(|v| v.powf(p) * g(eps * v.powf(m)))
}

/// `∫_0^ε s^{−τ}/(s + x) ds` for `x > 0`, or the principal value of
/// `∫_0^ε s^{−τ}/(s − X) ds` for `x = −X < 0` (without 1/π). When `X = ε` the
/// divergent `ln 0` is dropped as in [`cauchy_cell`].
fn cauchy_tip(x: f64, eps: f64, tau: f64) -> f64 {
    if x > 0.0 {
        return tip_integral(eps, tau, |s| 1.0 / (s + x));
    }
    let big_x = -x;
    let xt = big_x.powf(-tau);
    let log_part = if big_x == eps {
        -big_x.ln()
    } else {
        ((eps - big_x) / big_x).abs().ln()
    };
    let m = if tau > 0.0 { 1.0 / (1.0 - tau) } else { 1.0 };
    // ∫_0^ε (s^{−τ} − X^{−τ})/(s − X) ds
    let smooth = graded_unit(|v| {
        let s = eps * v.powf(m);
        let ds = eps * m * v.powf(m - 1.0);
        let diff = s - big_x;
        if diff.abs() < 1e-12 * big_x {
            -tau * big_x.powf(-tau - 1.0) * ds
        } else {
            (s.powf(-tau) - xt) / diff * ds
        }
    });
    xt * log_part + smooth
}

/// Weights of the tip and next node for `∫_0^ε f(s) k(s) ds` under the model
/// `f ≈ A s^{−τ} + B s^{1/2−τ}` through both nodes. `moment(t)` must return
/// `∫_0^ε s^{−t} k(s) ds`.
fn tip_weights(mesh: &SemiAxisMesh, tau: f64, moment: impl Fn(f64) -> f64) -> (f64, f64) {
    let nodes = mesh.nodes();
    let eps = mesh.tip_gap();
    let i_a = moment(tau);
    if nodes.len() < 3 {
        return (eps.powf(tau) * i_a, 0.0);
    }
    let s2 = nodes[mesh.tip_index() - 1].abs();
    let i_b = moment(tau - 0.5);
    let (q1, r1) = (eps.powf(-tau), eps.powf(0.5 - tau));
    let (q2, r2) = (s2.powf(-tau), s2.powf(0.5 - tau));
    let det = q1 * r2 - r1 * q2;
    ((i_a * r2 - i_b * q2) / det, (i_b * q1 - i_a * r1) / det)
}

/// Cauchy weight (without 1/π) of the far value for evaluation at `x`.
fn cauchy_tail(x: f64, l: f64, delta: f64) -> f64 {
    if delta.is_infinite() {
        return 0.0;
    }
    if x > 0.0 {
        return power_weighted(delta, |w| l / (l + x * w));
    }
    let big_x = -x;
    let ws = l / big_x;
    if ws > 2.0 {
        return power_weighted(delta, |w| ws / (ws - w));
    }
    let c = ws.powf(delta - 1.0);
    let log_part = if big_x == l {
        ws.ln() + big_x.ln()
    } else {
        ws.ln() - (ws - 1.0).abs().ln()
    };
    let smooth = if delta < 1.0 {
        graded_unit(|v| {
            let w = v.powf(1.0 / delta);
            let jac = v.powf(1.0 / delta - 1.0) / delta;
            (1.0 / delta - c * jac) / (ws - w)
        })
    } else {
        graded_unit(|w| {
            let d = ws - w;
            if d.abs() < 1e-12 {
                -(delta - 1.0) * ws.powf(delta - 2.0)
            } else {
                (w.powf(delta - 1.0) - c) / d
            }
        })
    };
    ws * (smooth + c * log_part)
}

fn cauchy_row(mesh: &SemiAxisMesh, tau: f64, delta: f64, x: f64) -> Vec<f64> {
    let nodes = mesh.nodes();
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for j in 0..n - 1 {
        let (wa, wb) = cauchy_cell(x, nodes[j], nodes[j + 1]);
        w[j] += wa;
        w[j + 1] += wb;
    }
    let eps = mesh.tip_gap();
    let (wt, w2) = tip_weights(mesh, tau, |t| cauchy_tip(x, eps, t));
    w[mesh.tip_index()] += wt;
    if n > 2 {
        w[mesh.tip_index() - 1] += w2;
    }
    w[mesh.far_index()] += cauchy_tail(x, mesh.truncation_radius(), delta);
    for v in &mut w {
        *v /= PI;
    }
    w
}

fn fredholm_row(mesh: &SemiAxisMesh, tau: f64, delta: f64, x: f64) -> Vec<f64> {
    let nodes = mesh.nodes();
    let n = nodes.len();
    let big_x = -x;
    let g = gauss4();
    let mut w = vec![0.0; n];
    for j in 0..n - 1 {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let h = b - a;
        let (mut wa, mut wb) = (0.0, 0.0);
        for (t, gw) in g.nodes.iter().zip(&g.weights) {
            let u = 0.5 * (t + 1.0);
            let xi = a + h * u;
            let k = log_kernel(-xi, big_x) * 0.5 * gw * h;
            wa += (1.0 - u) * k;
            wb += u * k;
        }
        w[j] += wa;
        w[j + 1] += wb;
    }
    let eps = mesh.tip_gap();
    let (wt, w2) = tip_weights(mesh, tau, |t| tip_integral(eps, t, |s| log_kernel(s, big_x)));
    w[mesh.tip_index()] += wt;
    if n > 2 {
        w[mesh.tip_index() - 1] += w2;
    }
    if delta.is_finite() {
        let l = mesh.truncation_radius();
        let lx = (l / big_x).ln();
        w[mesh.far_index()] += l * power_weighted(delta, |wv| {
            let d = l - big_x * wv;
            if d.abs() < 1e-8 * l {
                1.0 / l
            } else {
                (lx - wv.ln()) / d
            }
        });
    }
    for v in &mut w {
        *v /= PI * PI;
    }
    w
}

fn check_source(mesh: &SemiAxisMesh) -> Result<()> {
    if mesh.side() != Side::Negative {
        return Err(CrackError::Mesh("source must live on the crack side x < 0".into()));
    }
    Ok(())
}

fn check_eval(eval: &[f64], side: Side) -> Result<()> {
    for &x in eval {
        let ok = match side {
            Side::Negative => x < 0.0,
            Side::Positive => x > 0.0,
        };
        if !ok || !x.is_finite() {
            return Err(CrackError::Mesh(format!(
                "evaluation point {x} is not on the {side:?} semi-axis"
            )));
        }
    }
    Ok(())
}

fn assemble(
    kernel: Kernel,
    src: Arc<SemiAxisMesh>,
    tau: f64,
    delta: f64,
    eval: &[f64],
) -> OperatorMatrix {
    let rows: Vec<Vec<f64>> = eval
        .par_iter()
        .map(|&x| match kernel {
            Kernel::Cauchy => cauchy_row(&src, tau, delta, x),
            Kernel::Fredholm => fredholm_row(&src, tau, delta, x),
        })
        .collect();
    let n = src.len();
    let entries = DMatrix::from_fn(eval.len(), n, |i, j| rows[i][j]);
    OperatorMatrix {
        kernel,
        rows: eval.to_vec(),
        cols: src,
        tip_exponent: tau,
        decay_exponent: delta,
        entries,
    }
}

/// Dense `S^(s)` (or `S^(c)` for positive evaluation points) for sources on
/// `src` with the given tip and decay models.
pub fn assemble_cauchy(
    src: Arc<SemiAxisMesh>,
    tip_exponent: f64,
    decay_exponent: f64,
    eval: &[f64],
) -> Result<OperatorMatrix> {
    check_source(&src)?;
    if eval.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(CrackError::Mesh("cannot evaluate at the tip".into()));
    }
    Ok(assemble(Kernel::Cauchy, src, tip_exponent, decay_exponent, eval))
}

/// Dense `K` for sources on `src`, evaluated at negative points.
pub fn assemble_k(
    src: Arc<SemiAxisMesh>,
    tip_exponent: f64,
    decay_exponent: f64,
    eval: &[f64],
) -> Result<OperatorMatrix> {
    check_source(&src)?;
    check_eval(eval, Side::Negative)?;
    Ok(assemble(Kernel::Fredholm, src, tip_exponent, decay_exponent, eval))
}

fn apply_rows(kernel: Kernel, phi: &GridFunction, eval: &[f64]) -> Vec<f64> {
    let (tau, delta) = (phi.tip_exponent, phi.decay_exponent);
    eval.par_iter()
        .map(|&x| {
            let row = match kernel {
                Kernel::Cauchy => cauchy_row(&phi.mesh, tau, delta, x),
                Kernel::Fredholm => fredholm_row(&phi.mesh, tau, delta, x),
            };
            row.iter().zip(&phi.values).map(|(w, v)| w * v).sum()
        })
        .collect()
}

/// `S^(s)φ` on the nodes of a crack-side mesh.
pub fn apply_s_s(phi: &GridFunction, eval_mesh: Arc<SemiAxisMesh>) -> Result<GridFunction> {
    check_source(&phi.mesh)?;
    if eval_mesh.side() != Side::Negative {
        return Err(CrackError::Mesh("S^(s) is evaluated on x < 0".into()));
    }
    let values = apply_rows(Kernel::Cauchy, phi, eval_mesh.nodes());
    GridFunction::new(eval_mesh, values, phi.tip_exponent, phi.decay_exponent.min(1.0))
}

/// `S^(c)φ` on the nodes of an ahead-side mesh.
pub fn apply_s_c(phi: &GridFunction, eval_mesh: Arc<SemiAxisMesh>) -> Result<GridFunction> {
    check_source(&phi.mesh)?;
    if eval_mesh.side() != Side::Positive {
        return Err(CrackError::Mesh("S^(c) is evaluated on x > 0".into()));
    }
    let values = apply_rows(Kernel::Cauchy, phi, eval_mesh.nodes());
    GridFunction::new(eval_mesh, values, phi.tip_exponent, phi.decay_exponent.min(1.0))
}

/// `S^(s)φ` or `S^(c)φ` at arbitrary nonzero points.
pub fn apply_cauchy_at(phi: &GridFunction, eval: &[f64]) -> Result<Vec<f64>> {
    check_source(&phi.mesh)?;
    if eval.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(CrackError::Mesh("cannot evaluate at the tip".into()));
    }
    Ok(apply_rows(Kernel::Cauchy, phi, eval))
}

/// `Kφ` on the source mesh itself.
pub fn apply_k(phi: &GridFunction) -> Result<GridFunction> {
    check_source(&phi.mesh)?;
    let values = apply_rows(Kernel::Fredholm, phi, phi.mesh.nodes());
    GridFunction::new(
        phi.mesh.clone(),
        values,
        phi.tip_exponent,
        phi.decay_exponent.min(1.0),
    )
}

/// `Kφ` at arbitrary negative points.
pub fn apply_k_at(phi: &GridFunction, eval: &[f64]) -> Result<Vec<f64>> {
    check_source(&phi.mesh)?;
    check_eval(eval, Side::Negative)?;
    Ok(apply_rows(Kernel::Fredholm, phi, eval))
}

/// Cauchy transform of a unit point mass at `−a`: `1/(π(x+a))`, on either side.
pub fn apply_s_s_to_point_force(a: f64, eval: &[f64]) -> Result<Vec<f64>> {
    if !(a > 0.0) {
        return Err(CrackError::validation("a", format!("must be positive, got {a}")));
    }
    eval.iter()
        .map(|&x| {
            if x + a == 0.0 {
                Err(CrackError::Pole { at: x })
            } else {
                Ok(1.0 / (PI * (x + a)))
            }
        })
        .collect()
}

/// `Kδ_{−a}(x) = ln(a/(−x)) / (π²(x+a))`, continuous through `x = −a`.
pub fn k_of_point_mass(a: f64, x: f64) -> f64 {
    log_kernel(a, -x) / (PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_graded_mesh;

    fn graded(l: f64, n: usize, tip: f64) -> Arc<SemiAxisMesh> {
        let ratio = (l / tip).powf(1.0 / (n - 1) as f64);
        Arc::new(build_graded_mesh(l, n, ratio, &[]).unwrap())
    }

    #[test]
    fn indicator_far_from_support() {
        let mesh = Arc::new(SemiAxisMesh::uniform(-2.0, -1.0, 11).unwrap());
        let phi = GridFunction::from_fn(mesh, 0.0, f64::INFINITY, |_| 1.0).unwrap();
        // the indicator's tip segment would extend to 0; cancel it by hand
        let row = cauchy_row(&phi.mesh, 0.0, f64::INFINITY, -3.0);
        let tip = cauchy_tip(-3.0, 1.0, 0.0) / PI;
        let v: f64 = row.iter().sum::<f64>() - tip;
        assert!((v + 2f64.ln() / PI).abs() < 1e-13, "{v}");
        let row = cauchy_row(&phi.mesh, 0.0, f64::INFINITY, 1.0);
        let tip = cauchy_tip(1.0, 1.0, 0.0) / PI;
        let v: f64 = row.iter().sum::<f64>() - tip;
        assert!((v - 1.5f64.ln() / PI).abs() < 1e-13, "{v}");
    }

    #[test]
    fn power_laws() {
        let mesh = graded(100.0, 512, 1e-6);
        for (beta, expect) in [(0.5, 0.0), (0.25, 1.0)] {
            let phi = GridFunction::from_fn(mesh.clone(), beta, beta, |x| (-x).powf(-beta)).unwrap();
            let out = apply_cauchy_at(&phi, &[-10.0, -1.0, -0.1, -0.37]).unwrap();
            for (x, v) in [-10.0f64, -1.0, -0.1, -0.37].iter().zip(out) {
                let exact = expect * (-x).powf(-beta);
                assert!((v - exact).abs() < 1e-3, "beta {beta} x {x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn k_eigenfunctions() {
        let mesh = graded(100.0, 512, 1e-6);
        for (beta, lambda) in [(0.5, 1.0), (0.25, 2.0)] {
            let phi = GridFunction::from_fn(mesh.clone(), beta, beta, |x| (-x).powf(-beta)).unwrap();
            let pts = [-10.0, -1.0, -0.3, -0.05];
            let out = apply_k_at(&phi, &pts).unwrap();
            for (x, v) in pts.iter().zip(out) {
                let exact = lambda * (-x).powf(-beta);
                assert!((v - exact).abs() < 2e-3 * exact, "beta {beta} x {x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn point_force_sifting() {
        let v = apply_s_s_to_point_force(1.0, &[-3.0, -0.5]).unwrap();
        assert!((v[0] + 0.5 / PI).abs() < 1e-15);
        assert!((v[1] - 2.0 / PI).abs() < 1e-15);
        let v = apply_s_s_to_point_force(2.0, &[2.0]).unwrap();
        assert!((v[0] - 0.25 / PI).abs() < 1e-15);
        assert!(matches!(
            apply_s_s_to_point_force(1.0, &[-1.0]),
            Err(CrackError::Pole { .. })
        ));
    }

    #[test]
    fn dense_matches_matrix_free() {
        let mesh = graded(50.0, 200, 1e-5);
        let phi = GridFunction::from_fn(mesh.clone(), 0.5, 2.5, |x| {
            (-x).powf(-0.5) * (-(x + 3.0).powi(2)).exp()
        })
        .unwrap();
        let op = assemble_cauchy(mesh.clone(), 0.5, 2.5, mesh.nodes()).unwrap();
        let dense = op.apply(&phi).unwrap();
        let free = apply_s_s(&phi, mesh.clone()).unwrap();
        for (a, b) in dense.iter().zip(&free.values) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn composition_identity() {
        let mesh = graded(100.0, 2048, 1e-4);
        let phi = GridFunction::from_fn(mesh.clone(), 0.0, f64::INFINITY, |x| {
            (-(x + 5.0).powi(2)).exp()
        })
        .unwrap();
        let s1 = apply_s_s(&phi, mesh.clone()).unwrap();
        let s2 = apply_s_s(&s1, mesh.clone()).unwrap();
        let k = apply_k(&phi).unwrap();
        let mut err: f64 = 0.0;
        for (i, &x) in mesh.nodes().iter().enumerate() {
            if x < -90.0 || x > -1e-3 {
                continue;
            }
            err = err.max((s2.values[i] + phi.values[i] - k.values[i]).abs());
        }
        assert!(err < 1e-3, "{err}");
    }
}
