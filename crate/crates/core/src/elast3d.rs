//! Three-dimensional interface crack: Fourier symbols, the plane convolution
//! operators `Q`, `Q₁`, `Q₃`, the integral identities as forward maps, and
//! the numerical checks that tie them to the two-dimensional modules.
//!
//! Fields live on a uniform cell-centred grid over `(x₁, x₃)`. Convolutions
//! with `1/r` and `x_j/r²` use product integration: the field is taken
//! constant on each cell and the kernel is integrated over the cell in closed
//! form. The resulting discrete convolution is evaluated with a zero-padded
//! FFT, which is exact (no wrap-around). A second, spectral route multiplies
//! the discrete Fourier transform by the symbol on a periodic box; the two
//! are compared in the tests.
//!
//! Fourier transforms follow `f̄(β, λ) = ∬ f e^{i(βx₁ + λx₃)}`, so `∂₁ ↔ −iβ`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::bimaterial::BimaterialConstants;
use crate::error::{CrackError, Result};

// ---------------------------------------------------------------------------
// Symbols

#[derive(Debug, Clone, PartialEq)]
pub struct FourierSymbolMatrices {
    pub beta: f64,
    pub lambda: f64,
    pub rho: f64,
    pub g: Matrix3<Complex64>,
    pub f: Matrix3<Complex64>,
    pub e2: Matrix3<f64>,
    pub e3: Matrix3<f64>,
    pub a: Matrix3<Complex64>,
    pub b: Matrix3<Complex64>,
}

pub fn e2_matrix(beta: f64, lambda: f64) -> Matrix3<f64> {
    Matrix3::new(
        lambda * lambda, 0.0, -beta * lambda,
        0.0, 0.0, 0.0,
        -beta * lambda, 0.0, beta * beta,
    )
}

pub fn e3_matrix(beta: f64, lambda: f64) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -beta, 0.0,
        beta, 0.0, lambda,
        0.0, -lambda, 0.0,
    )
}

fn cplx(m: &Matrix3<f64>) -> Matrix3<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `G`, `F`, `E₂`, `E₃`, `A`, `B` at the wave vector `(β, λ)`.
pub fn assemble_symbols(mat: &BimaterialConstants, beta: f64, lambda: f64) -> Result<FourierSymbolMatrices> {
    let rho = beta.hypot(lambda);
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(CrackError::validation(
            "wave_vector",
            format!("(β, λ) = ({beta}, {lambda}) must be finite and nonzero"),
        ));
    }
    let (b, e, d, f) = (mat.b, mat.e, mat.d, mat.f);
    let (al, ga) = (mat.alpha, mat.gamma);
    let i = Complex64::i();
    let id = Matrix3::<Complex64>::identity();
    let e2 = e2_matrix(beta, lambda);
    let e3 = e3_matrix(beta, lambda);
    let (e2c, e3c) = (cplx(&e2), cplx(&e3));
    let r2 = rho * rho;

    let c = Complex64::from;
    let g = (id * c(b * r2) + e2c * c(e) + e3c * (i * d * rho)) * c(-1.0 / r2);
    let ff = (id * c(b * al * r2) + e2c * c(f) + e3c * (i * b * ga * rho)) * c(-0.5 / r2);
    let det = b * b - d * d;
    let a = (id * c(b * (b * al - d * ga) * (b + e) * r2)
        + e2c * c(b * d * ga * (b + e) - b * al * (b * e + d * d) + det * f)
        + e3c * (i * b * (b * ga - d * al) * (b + e) * rho))
        * c(1.0 / (2.0 * det * (b + e) * r2));
    let bb = (id * c(-b * (b + e) * r2) + e2c * c(b * e + d * d) + e3c * (i * d * (b + e) * rho))
        * c(1.0 / (det * (b + e) * rho));
    Ok(FourierSymbolMatrices {
        beta,
        lambda,
        rho,
        g,
        f: ff,
        e2,
        e3,
        a,
        b: bb,
    })
}

// ---------------------------------------------------------------------------
// Grids and fields

/// Uniform cell-centred grid: `n1` cells on `[x1_lo, x1_hi]` and `n3` cells on
/// `[−x3_half, x3_half]`. Rows run along `x₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGrid {
    n1: usize,
    n3: usize,
    x1_lo: f64,
    x1_hi: f64,
    x3_half: f64,
}

impl PlaneGrid {
    pub fn new(x1_range: (f64, f64), x3_half: f64, n1: usize, n3: usize) -> Result<Self> {
        let (lo, hi) = x1_range;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(CrackError::Mesh(format!("invalid x₁ range [{lo}, {hi}]")));
        }
        if !(x3_half > 0.0 && x3_half.is_finite()) {
            return Err(CrackError::Mesh(format!("invalid x₃ half-width {x3_half}")));
        }
        if n1 < 8 || n3 < 8 {
            return Err(CrackError::Mesh("at least 8 cells per direction are required".into()));
        }
        Ok(PlaneGrid {
            n1,
            n3,
            x1_lo: lo,
            x1_hi: hi,
            x3_half,
        })
    }

    /// `n × n` cells on `[−half, half]²`.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half), half, n, n)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h1(&self) -> f64 {
        (self.x1_hi - self.x1_lo) / self.n1 as f64
    }

    pub fn h3(&self) -> f64 {
        2.0 * self.x3_half / self.n3 as f64
    }

    pub fn x3_half(&self) -> f64 {
        self.x3_half
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.x1_lo + (i as f64 + 0.5) * self.h1()
    }

    pub fn x3(&self, k: usize) -> f64 {
        -self.x3_half + (k as f64 + 0.5) * self.h3()
    }

    pub fn index(&self, i1: usize, i3: usize) -> usize {
        i3 * self.n1 + i1
    }

    /// Number of leading columns with `x₁ < 0`.
    pub fn negative_columns(&self) -> usize {
        (0..self.n1).take_while(|&i| self.x1(i) < 0.0).count()
    }

    pub fn x1_nodes(&self) -> Vec<f64> {
        (0..self.n1).map(|i| self.x1(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Source fields on the crack faces, zero for `x₁ ≥ 0`.
    CrackFaces,
    FullPlane,
}

/// Three-component field sampled at the cell centres of a [`PlaneGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGridFunction {
    pub grid: Arc<PlaneGrid>,
    pub values: [Vec<f64>; 3],
    pub support: Support,
}

impl PlaneGridFunction {
    pub fn zeros(grid: Arc<PlaneGrid>, support: Support) -> Self {
        let n = grid.len();
        PlaneGridFunction {
            grid,
            values: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            support,
        }
    }

    pub fn from_fn(grid: Arc<PlaneGrid>, support: Support, f: impl Fn(f64, f64) -> [f64; 3]) -> Result<Self> {
        let mut out = Self::zeros(grid.clone(), support);
        for k in 0..grid.n3() {
            for i in 0..grid.n1() {
                let v = f(grid.x1(i), grid.x3(k));
                let idx = grid.index(i, k);
                for c in 0..3 {
                    out.values[c][idx] = v[c];
                }
            }
        }
        out.check_support()?;
        Ok(out)
    }

    /// Field independent of `x₃`.
    pub fn from_profile(grid: Arc<PlaneGrid>, support: Support, f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        Self::from_fn(grid, support, |x1, _| f(x1))
    }

    pub fn from_components(grid: Arc<PlaneGrid>, support: Support, values: [Vec<f64>; 3]) -> Result<Self> {
        if values.iter().any(|v| v.len() != grid.len()) {
            return Err(CrackError::Mesh("component length does not match the grid".into()));
        }
        let out = PlaneGridFunction { grid, values, support };
        out.check_support()?;
        Ok(out)
    }

    fn check_support(&self) -> Result<()> {
        if self.support == Support::FullPlane {
            return Ok(());
        }
        let g = &self.grid;
        let neg = g.negative_columns();
        for k in 0..g.n3() {
            for i in neg..g.n1() {
                if self.values.iter().any(|v| v[g.index(i, k)] != 0.0) {
                    return Err(CrackError::validation(
                        "field",
                        format!("source field is nonzero at x₁ = {} ≥ 0", g.x1(i)),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Largest magnitude on the first and last `x₃` rows relative to the
    /// overall maximum: the decay check for the symmetric `x₃` truncation.
    pub fn edge_ratio(&self) -> f64 {
        let g = &self.grid;
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let mut e = 0.0f64;
        for k in [0, g.n3() - 1] {
            for i in 0..g.n1() {
                for v in &self.values {
                    e = e.max(v[g.index(i, k)].abs());
                }
            }
        }
        e / m
    }
}

// ---------------------------------------------------------------------------
// FFT on row-major arrays

struct Fft2 {
    m1: usize,
    m3: usize,
    rows: Arc<dyn Fft<f64>>,
    cols: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(m1: usize, m3: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            m1,
            m3,
            rows: planner.plan_fft(m1, direction),
            cols: planner.plan_fft(m3, direction),
        }
    }

    fn process(&self, data: &mut [Complex64]) {
        let (m1, m3) = (self.m1, self.m3);
        data.par_chunks_mut(m1).for_each(|row| self.rows.process(row));
        let mut t = vec![Complex64::new(0.0, 0.0); m1 * m3];
        t.par_chunks_mut(m3).enumerate().for_each(|(i, col)| {
            for (k, c) in col.iter_mut().enumerate() {
                *c = data[k * m1 + i];
            }
            self.cols.process(col);
        });
        data.par_chunks_mut(m1).enumerate().for_each(|(k, row)| {
            for (i, r) in row.iter_mut().enumerate() {
                *r = t[i * m3 + k];
            }
        });
    }
}

// ---------------------------------------------------------------------------
// Product-integration convolutions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneKernel {
    /// `1/(π r)`, the kernel of `Q`.
    Inverse,
    /// `x₁/(π r²)`, the kernel of `Q₁`.
    Odd1,
    /// `x₃/(π r²)`, the kernel of `Q₃`.
    Odd3,
}

fn x_asinh(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (y / x.abs()).asinh()
    }
}

/// Antiderivative of `1/r` in both variables.
fn prim_inverse(x: f64, y: f64) -> f64 {
    x_asinh(x, y) + x_asinh(y, x)
}

/// Antiderivative of `x/r²` in both variables, up to terms linear in `y`.
fn prim_odd(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return 0.0;
    }
    let t = if x == 0.0 { 0.0 } else { x * (y / x).atan() };
    0.5 * y * r2.ln() + t
}

fn rectangle(prim: impl Fn(f64, f64) -> f64, x: (f64, f64), y: (f64, f64)) -> f64 {
    prim(x.1, y.1) - prim(x.0, y.1) - prim(x.1, y.0) + prim(x.0, y.0)
}

/// Integral of the kernel over the cell centred at offset `(d1·h1, d3·h3)`.
pub fn cell_weight(kernel: PlaneKernel, d1: i64, d3: i64, h1: f64, h3: f64) -> f64 {
    let (c1, c3) = (d1 as f64 * h1, d3 as f64 * h3);
    let x = (c1 - 0.5 * h1, c1 + 0.5 * h1);
    let y = (c3 - 0.5 * h3, c3 + 0.5 * h3);
    let v = match kernel {
        PlaneKernel::Inverse => rectangle(prim_inverse, x, y),
        PlaneKernel::Odd1 => {
            if d1 == 0 {
                return 0.0;
            }
            rectangle(prim_odd, x, y)
        }
        PlaneKernel::Odd3 => {
            if d3 == 0 {
                return 0.0;
            }
            rectangle(|a, b| prim_odd(b, a), x, y)
        }
    };
    v / PI
}

/// Transformed kernels of `Q`, `Q₁`, `Q₃` for one grid, on a box padded to
/// twice the grid in each direction.
pub struct ConvolutionPlan {
    grid: Arc<PlaneGrid>,
    forward: Fft2,
    inverse: Fft2,
    kernels: [Vec<Complex64>; 3],
}

impl ConvolutionPlan {
    pub fn new(grid: Arc<PlaneGrid>) -> Self {
        let (n1, n3) = (grid.n1(), grid.n3());
        let (m1, m3) = (2 * n1, 2 * n3);
        let forward = Fft2::new(m1, m3, FftDirection::Forward);
        let inverse = Fft2::new(m1, m3, FftDirection::Inverse);
        let (h1, h3) = (grid.h1(), grid.h3());
        let wrap = |i: usize, m: usize, n: usize| -> Option<i64> {
            if i < n {
                Some(i as i64)
            } else if i > m - n {
                Some(i as i64 - m as i64)
            } else {
                None
            }
        };
        let build = |kernel: PlaneKernel| {
            let mut k = vec![Complex64::new(0.0, 0.0); m1 * m3];
            k.par_chunks_mut(m1).enumerate().for_each(|(r, row)| {
                let Some(d3) = wrap(r, m3, n3) else { return };
                for (c, v) in row.iter_mut().enumerate() {
                    if let Some(d1) = wrap(c, m1, n1) {
                        *v = Complex64::new(cell_weight(kernel, d1, d3, h1, h3), 0.0);
                    }
                }
            });
            forward.process(&mut k);
            k
        };
        let kernels = [
            build(PlaneKernel::Inverse),
            build(PlaneKernel::Odd1),
            build(PlaneKernel::Odd3),
        ];
        ConvolutionPlan {
            grid,
            forward,
            inverse,
            kernels,
        }
    }

    pub fn grid(&self) -> &Arc<PlaneGrid> {
        &self.grid
    }

    /// Discrete convolution of cell values with the cell-integrated kernel.
    pub fn convolve(&self, kernel: PlaneKernel, v: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (n1, n3) = (g.n1(), g.n3());
        let (m1, m3) = (2 * n1, 2 * n3);
        if v.iter().all(|x| *x == 0.0) {
            return vec![0.0; n1 * n3];
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m1 * m3];
        for k in 0..n3 {
            for i in 0..n1 {
                buf[k * m1 + i] = Complex64::new(v[k * n1 + i], 0.0);
            }
        }
        self.forward.process(&mut buf);
        let kern = &self.kernels[kernel as usize];
        buf.par_iter_mut().zip(kern.par_iter()).for_each(|(b, k)| *b *= k);
        self.inverse.process(&mut buf);
        let scale = 1.0 / (m1 * m3) as f64;
        let mut out = vec![0.0; n1 * n3];
        for k in 0..n3 {
            for i in 0..n1 {
                out[k * n1 + i] = buf[k * m1 + i].re * scale;
            }
        }
        out
    }

    /// Same sum evaluated term by term; `O(N²)`, for cross-checks on small grids.
    pub fn convolve_direct(&self, kernel: PlaneKernel, v: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (n1, n3, h1, h3) = (g.n1(), g.n3(), g.h1(), g.h3());
        (0..n1 * n3)
            .into_par_iter()
            .map(|p| {
                let (i, k) = ((p % n1) as i64, (p / n1) as i64);
                let mut s = 0.0;
                for q in 0..n1 * n3 {
                    if v[q] != 0.0 {
                        let (j, l) = ((q % n1) as i64, (q / n1) as i64);
                        s += cell_weight(kernel, i - j, k - l, h1, h3) * v[q];
                    }
                }
                s
            })
            .collect()
    }
}

fn same_grid(a: &PlaneGridFunction, b: &Arc<PlaneGrid>) -> Result<()> {
    if a.grid != *b {
        return Err(CrackError::Mesh("fields live on different grids".into()));
    }
    Ok(())
}

fn apply_kernel(plan: &ConvolutionPlan, kernel: PlaneKernel, phi: &PlaneGridFunction) -> Result<PlaneGridFunction> {
    same_grid(phi, plan.grid())?;
    let values = [0, 1, 2].map(|c| plan.convolve(kernel, &phi.values[c]));
    Ok(PlaneGridFunction {
        grid: phi.grid.clone(),
        values,
        support: Support::FullPlane,
    })
}

/// `Qφ = (1/π) ∬ φ(ξ)/|x − ξ| dξ`, componentwise.
pub fn apply_q(phi: &PlaneGridFunction) -> PlaneGridFunction {
    let plan = ConvolutionPlan::new(phi.grid.clone());
    apply_kernel(&plan, PlaneKernel::Inverse, phi).expect("plan built on the field's grid")
}

/// `Q_jφ = (1/π) ∬ (x_j − ξ_j) φ(ξ)/|x − ξ|² dξ` for `j ∈ {1, 3}`.
pub fn apply_qj(phi: &PlaneGridFunction, j: usize) -> Result<PlaneGridFunction> {
    let kernel = match j {
        1 => PlaneKernel::Odd1,
        3 => PlaneKernel::Odd3,
        _ => return Err(CrackError::validation("j", format!("must be 1 or 3, got {j}"))),
    };
    let plan = ConvolutionPlan::new(phi.grid.clone());
    apply_kernel(&plan, kernel, phi)
}

// ---------------------------------------------------------------------------
// Finite differences

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X3,
}

fn diff_line(f: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if order == 1 {
        let s = 1.0 / (12.0 * h);
        let edge0 = |f: &dyn Fn(usize) -> f64| (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) * s;
        let edge1 = |f: &dyn Fn(usize) -> f64| (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) * s;
        let fwd = |k: usize| f[k];
        let bwd = |k: usize| f[n - 1 - k];
        d[0] = edge0(&fwd);
        d[1] = edge1(&fwd);
        d[n - 1] = -edge0(&bwd);
        d[n - 2] = -edge1(&bwd);
        for i in 2..n - 2 {
            d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
        }
    } else {
        let s = 1.0 / (12.0 * h * h);
        let edge0 = |f: &dyn Fn(usize) -> f64| {
            (45.0 * f(0) - 154.0 * f(1) + 214.0 * f(2) - 156.0 * f(3) + 61.0 * f(4) - 10.0 * f(5)) * s
        };
        let edge1 = |f: &dyn Fn(usize) -> f64| {
            (10.0 * f(0) - 15.0 * f(1) - 4.0 * f(2) + 14.0 * f(3) - 6.0 * f(4) + f(5)) * s
        };
        let fwd = |k: usize| f[k];
        let bwd = |k: usize| f[n - 1 - k];
        d[0] = edge0(&fwd);
        d[1] = edge1(&fwd);
        d[n - 1] = edge0(&bwd);
        d[n - 2] = edge1(&bwd);
        for i in 2..n - 2 {
            d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * s;
        }
    }
    d
}

/// `∂/∂x_axis` (order 1) or `∂²/∂x_axis²` (order 2) of one component, with
/// 4th-order centred stencils inside the support and one-sided stencils at
/// its edges. For crack-face support the `x₁` lines stop at the last cell
/// with `x₁ < 0`.
fn derivative(grid: &PlaneGrid, v: &[f64], support: Support, axis: Axis, order: usize) -> Result<Vec<f64>> {
    let (n1, n3) = (grid.n1(), grid.n3());
    let cols = match support {
        Support::CrackFaces => grid.negative_columns(),
        Support::FullPlane => n1,
    };
    let mut out = vec![0.0; n1 * n3];
    match axis {
        Axis::X1 => {
            if cols < 6 {
                return Err(CrackError::Mesh("fewer than 6 cells across the support".into()));
            }
            let h = grid.h1();
            out.par_chunks_mut(n1).enumerate().for_each(|(k, row)| {
                let d = diff_line(&v[k * n1..k * n1 + cols], h, order);
                row[..cols].copy_from_slice(&d);
            });
        }
        Axis::X3 => {
            let h = grid.h3();
            let lines: Vec<Vec<f64>> = (0..cols)
                .into_par_iter()
                .map(|i| {
                    let line: Vec<f64> = (0..n3).map(|k| v[k * n1 + i]).collect();
                    diff_line(&line, h, order)
                })
                .collect();
            for (i, d) in lines.iter().enumerate() {
                for k in 0..n3 {
                    out[k * n1 + i] = d[k];
                }
            }
        }
    }
    Ok(out)
}

/// First or second partial derivative of every component.
pub fn partial(phi: &PlaneGridFunction, axis: Axis, order: usize) -> Result<PlaneGridFunction> {
    if order != 1 && order != 2 {
        return Err(CrackError::validation("order", "must be 1 or 2"));
    }
    let mut out = PlaneGridFunction::zeros(phi.grid.clone(), phi.support);
    for c in 0..3 {
        out.values[c] = derivative(&phi.grid, &phi.values[c], phi.support, axis, order)?;
    }
    Ok(out)
}

/// Scalar derivative helper used by the operator stack.
struct Derivs<'a> {
    grid: &'a PlaneGrid,
    support: Support,
}

impl Derivs<'_> {
    fn d1(&self, v: &[f64]) -> Result<Vec<f64>> {
        derivative(self.grid, v, self.support, Axis::X1, 1)
    }
    fn d3(&self, v: &[f64]) -> Result<Vec<f64>> {
        derivative(self.grid, v, self.support, Axis::X3, 1)
    }
    fn d11(&self, v: &[f64]) -> Result<Vec<f64>> {
        derivative(self.grid, v, self.support, Axis::X1, 2)
    }
    fn d33(&self, v: &[f64]) -> Result<Vec<f64>> {
        derivative(self.grid, v, self.support, Axis::X3, 2)
    }
    fn d13(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.d1(&self.d3(v)?)
    }
}

fn comb(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    let mut out = vec![0.0; n];
    for (a, v) in terms {
        if *a != 0.0 {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o += a * x;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Interface operators

/// Scalar coefficients of the full-plane operators
/// `𝓐 = a_identity·I + a_e2·𝓔₂ + a_e3·Q E₃(∂₁, ∂₃)` and
/// `𝓑 = b_laplace·Q Δ + b_e2·Q E₂(∂₁, ∂₃) + b_e3·E₃(∂₁, ∂₃)`.
/// The crack-side and ahead versions are `P₋ 𝓐 P₋` and `P₊ 𝓐 P₋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceOperators3d {
    pub a_identity: f64,
    pub a_e2: f64,
    pub a_e3: f64,
    pub b_laplace: f64,
    pub b_e2: f64,
    pub b_e3: f64,
}

pub fn assemble_operators_3d(mat: &BimaterialConstants) -> InterfaceOperators3d {
    let (b, e, d, f) = (mat.b, mat.e, mat.d, mat.f);
    let (al, ga) = (mat.alpha, mat.gamma);
    let det = b * b - d * d;
    let pre = 1.0 / (2.0 * det * (b + e));
    InterfaceOperators3d {
        a_identity: pre * b * (b * al - d * ga) * (b + e),
        a_e2: pre * 0.5 * (b * d * ga * (b + e) - b * al * (b * e + d * d) + det * f),
        a_e3: -pre * 0.5 * b * (b * ga - d * al) * (b + e),
        b_laplace: pre * b * (b + e),
        b_e2: -pre * (b * e + d * d),
        b_e3: -pre * 2.0 * d * (b + e),
    }
}

fn source_check(phi: &PlaneGridFunction, plan: &ConvolutionPlan) -> Result<()> {
    same_grid(phi, plan.grid())?;
    if phi.support != Support::CrackFaces {
        return Err(CrackError::validation("field", "operator inputs must be crack-face fields"));
    }
    phi.check_support()
}

/// `E₃(∂₁, ∂₃)v = (−∂₁v₂, ∂₁v₁ + ∂₃v₃, −∂₃v₂)`.
fn e3_apply(dv: &Derivs, v: &[Vec<f64>; 3]) -> Result<[Vec<f64>; 3]> {
    let d1v2 = dv.d1(&v[1])?;
    let d3v2 = dv.d3(&v[1])?;
    Ok([
        d1v2.iter().map(|x| -x).collect(),
        comb(&[(1.0, &dv.d1(&v[0])?), (1.0, &dv.d3(&v[2])?)]),
        d3v2.iter().map(|x| -x).collect(),
    ])
}

impl InterfaceOperators3d {
    /// Full-plane `𝓐⟦p⟧` for a crack-face field.
    pub fn apply_a(&self, plan: &ConvolutionPlan, skew: &PlaneGridFunction) -> Result<PlaneGridFunction> {
        source_check(skew, plan)?;
        let dv = Derivs {
            grid: &skew.grid,
            support: skew.support,
        };
        let j = &skew.values;
        let mut out = PlaneGridFunction::zeros(skew.grid.clone(), Support::FullPlane);
        for c in 0..3 {
            out.values[c] = j[c].iter().map(|x| self.a_identity * x).collect();
        }
        if self.a_e2 != 0.0 {
            let q1 = |v: Vec<f64>| plan.convolve(PlaneKernel::Odd1, &v);
            let q3 = |v: Vec<f64>| plan.convolve(PlaneKernel::Odd3, &v);
            let e0 = comb(&[(1.0, &q3(dv.d3(&j[0])?)), (-1.0, &q1(dv.d3(&j[2])?))]);
            let e2 = comb(&[(-1.0, &q3(dv.d1(&j[0])?)), (1.0, &q1(dv.d1(&j[2])?))]);
            for (o, x) in out.values[0].iter_mut().zip(&e0) {
                *o += self.a_e2 * x;
            }
            for (o, x) in out.values[2].iter_mut().zip(&e2) {
                *o += self.a_e2 * x;
            }
        }
        if self.a_e3 != 0.0 {
            let e = e3_apply(&dv, j)?;
            for c in 0..3 {
                let q = plan.convolve(PlaneKernel::Inverse, &e[c]);
                for (o, x) in out.values[c].iter_mut().zip(&q) {
                    *o += self.a_e3 * x;
                }
            }
        }
        Ok(out)
    }

    /// Full-plane `𝓑⟦u⟧` for a crack-face opening.
    pub fn apply_b(&self, plan: &ConvolutionPlan, opening: &PlaneGridFunction) -> Result<PlaneGridFunction> {
        source_check(opening, plan)?;
        let dv = Derivs {
            grid: &opening.grid,
            support: opening.support,
        };
        let u = &opening.values;
        let d11: Vec<Vec<f64>> = u.iter().map(|v| dv.d11(v)).collect::<Result<_>>()?;
        let d33: Vec<Vec<f64>> = u.iter().map(|v| dv.d33(v)).collect::<Result<_>>()?;
        let d13_1 = dv.d13(&u[0])?;
        let d13_3 = dv.d13(&u[2])?;
        // E₂(∂)u = (∂₃²u₁ − ∂₁∂₃u₃, 0, −∂₁∂₃u₁ + ∂₁²u₃)
        let inner = [
            comb(&[
                (self.b_laplace, &d11[0]),
                (self.b_laplace, &d33[0]),
                (self.b_e2, &d33[0]),
                (-self.b_e2, &d13_3),
            ]),
            comb(&[(self.b_laplace, &d11[1]), (self.b_laplace, &d33[1])]),
            comb(&[
                (self.b_laplace, &d11[2]),
                (self.b_laplace, &d33[2]),
                (-self.b_e2, &d13_1),
                (self.b_e2, &d11[2]),
            ]),
        ];
        let mut out = PlaneGridFunction::zeros(opening.grid.clone(), Support::FullPlane);
        for c in 0..3 {
            out.values[c] = plan.convolve(PlaneKernel::Inverse, &inner[c]);
        }
        if self.b_e3 != 0.0 {
            let e = e3_apply(&dv, u)?;
            for c in 0..3 {
                for (o, x) in out.values[c].iter_mut().zip(&e[c]) {
                    *o += self.b_e3 * x;
                }
            }
        }
        Ok(out)
    }
}

/// The operators of a homogeneous body in their reduced form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousOperators3d {
    pub shear_modulus: f64,
    pub poisson_ratio: f64,
}

impl HomogeneousOperators3d {
    /// `−(1−2ν)/(8(1−ν)) Q E₃(∂₁, ∂₃)⟦p⟧`.
    pub fn apply_a(&self, plan: &ConvolutionPlan, skew: &PlaneGridFunction) -> Result<PlaneGridFunction> {
        source_check(skew, plan)?;
        let nu = self.poisson_ratio;
        let c = -(1.0 - 2.0 * nu) / (8.0 * (1.0 - nu));
        let dv = Derivs {
            grid: &skew.grid,
            support: skew.support,
        };
        let e = e3_apply(&dv, &skew.values)?;
        let mut out = PlaneGridFunction::zeros(skew.grid.clone(), Support::FullPlane);
        for k in 0..3 {
            out.values[k] = plan
                .convolve(PlaneKernel::Inverse, &e[k])
                .into_iter()
                .map(|x| c * x)
                .collect();
        }
        Ok(out)
    }

    /// `μ/(4(1−ν)) Q M(∂)⟦u⟧` with the matrix of second derivatives.
    pub fn apply_b(&self, plan: &ConvolutionPlan, opening: &PlaneGridFunction) -> Result<PlaneGridFunction> {
        source_check(opening, plan)?;
        let nu = self.poisson_ratio;
        let c = self.shear_modulus / (4.0 * (1.0 - nu));
        let dv = Derivs {
            grid: &opening.grid,
            support: opening.support,
        };
        let u = &opening.values;
        let inner = [
            comb(&[(1.0, &dv.d11(&u[0])?), (1.0 - nu, &dv.d33(&u[0])?), (nu, &dv.d13(&u[2])?)]),
            comb(&[(1.0, &dv.d11(&u[1])?), (1.0, &dv.d33(&u[1])?)]),
            comb(&[(nu, &dv.d13(&u[0])?), (1.0 - nu, &dv.d11(&u[2])?), (1.0, &dv.d33(&u[2])?)]),
        ];
        let mut out = PlaneGridFunction::zeros(opening.grid.clone(), Support::FullPlane);
        for k in 0..3 {
            out.values[k] = plan
                .convolve(PlaneKernel::Inverse, &inner[k])
                .into_iter()
                .map(|x| c * x)
                .collect();
        }
        Ok(out)
    }
}

/// Edge ratio above which a field is treated as not decaying in `x₃`; the
/// residual is then trusted only on `|x₃| ≤ x3_half/2`.
pub const DECAY_TOL: f64 = 1e-6;

/// Residuals of the two identities on one grid.
#[derive(Debug, Clone)]
pub struct IdentityResidual3d {
    /// `⟨p⟩ + 𝓐^(s)⟦p⟧ − 𝓑^(s)⟦u⟧` on `x₁ < 0`, zero elsewhere.
    pub crack: PlaneGridFunction,
    /// `⟨σ₂⟩^(+) = 𝓑^(c)⟦u⟧ − 𝓐^(c)⟦p⟧` on `x₁ > 0`, zero elsewhere.
    pub traction_ahead: PlaneGridFunction,
    pub edge_ratio: f64,
}

impl IdentityResidual3d {
    /// Rows on which truncation in `x₃` does not contaminate the result.
    pub fn trusted_rows(&self) -> Vec<usize> {
        let g = &self.crack.grid;
        let lim = if self.edge_ratio > DECAY_TOL {
            0.5 * g.x3_half()
        } else {
            f64::INFINITY
        };
        (0..g.n3()).filter(|&k| g.x3(k).abs() <= lim).collect()
    }

    fn max_on_trusted(&self, f: &PlaneGridFunction, comps: &[usize]) -> f64 {
        let g = &f.grid;
        let mut m = 0.0f64;
        for k in self.trusted_rows() {
            for i in 0..g.n1() {
                for &c in comps {
                    m = m.max(f.values[c][g.index(i, k)].abs());
                }
            }
        }
        m
    }

    pub fn max_crack(&self) -> f64 {
        self.max_on_trusted(&self.crack, &[0, 1, 2])
    }

    pub fn max_crack_component(&self, c: usize) -> f64 {
        self.max_on_trusted(&self.crack, &[c])
    }
}

/// Evaluates both three-dimensional identities for a given opening and
/// crack-face loading. Used for verification; nothing is solved.
pub fn forward_identity_3d(
    opening: &PlaneGridFunction,
    sym_load: &PlaneGridFunction,
    skew_load: &PlaneGridFunction,
    mat: &BimaterialConstants,
) -> Result<IdentityResidual3d> {
    let plan = ConvolutionPlan::new(opening.grid.clone());
    forward_identity_3d_with(&plan, opening, sym_load, skew_load, mat)
}

pub fn forward_identity_3d_with(
    plan: &ConvolutionPlan,
    opening: &PlaneGridFunction,
    sym_load: &PlaneGridFunction,
    skew_load: &PlaneGridFunction,
    mat: &BimaterialConstants,
) -> Result<IdentityResidual3d> {
    source_check(sym_load, plan)?;
    let ops = assemble_operators_3d(mat);
    let a = ops.apply_a(plan, skew_load)?;
    let b = ops.apply_b(plan, opening)?;
    let g = opening.grid.clone();
    let neg = g.negative_columns();
    let mut crack = PlaneGridFunction::zeros(g.clone(), Support::FullPlane);
    let mut ahead = PlaneGridFunction::zeros(g.clone(), Support::FullPlane);
    for c in 0..3 {
        for k in 0..g.n3() {
            for i in 0..g.n1() {
                let p = g.index(i, k);
                if i < neg {
                    crack.values[c][p] = sym_load.values[c][p] + a.values[c][p] - b.values[c][p];
                } else {
                    ahead.values[c][p] = b.values[c][p] - a.values[c][p];
                }
            }
        }
    }
    let edge_ratio = [opening, sym_load, skew_load]
        .iter()
        .map(|f| f.edge_ratio())
        .fold(0.0, f64::max);
    Ok(IdentityResidual3d {
        crack,
        traction_ahead: ahead,
        edge_ratio,
    })
}

// ---------------------------------------------------------------------------
// Spectral route

/// Constant term of the neutralised lattice sum of `1/r` over the periods
/// `p1 × p3`: `Σ'_R 1/|x + R| − background = 1/|x| + C + O(|x|²)`.
/// Evaluated by Ewald summation.
pub fn lattice_constant(p1: f64, p3: f64) -> f64 {
    let area = p1 * p3;
    let a = (PI / area).sqrt();
    let reach = |p: f64| -> i64 {
        let real = 7.0 / (a * p);
        let recip = 7.0 * 2.0 * a * p / (2.0 * PI);
        real.max(recip).ceil().min(4000.0) as i64
    };
    let (n1, n3) = (reach(p1), reach(p3));
    let mut s = 0.0;
    for m in -n1..=n1 {
        for n in -n3..=n3 {
            if m == 0 && n == 0 {
                continue;
            }
            let r = (m as f64 * p1).hypot(n as f64 * p3);
            s += erfc(a * r) / r;
            let k = 2.0 * PI * (m as f64 / p1).hypot(n as f64 / p3);
            s += 2.0 * PI / area * erfc(k / (2.0 * a)) / k;
        }
    }
    s - 2.0 * PI.sqrt() / (a * area) - 2.0 * a / PI.sqrt()
}

/// Complementary error function: Taylor series of `erf` below 1, continued
/// fraction above.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x > 27.0 {
        return 0.0;
    }
    if x < 1.0 {
        let mut sum = x;
        let mut term = x;
        let x2 = x * x;
        let mut k = 0.0;
        while term.abs() > 1e-17 * sum.abs() {
            k += 1.0;
            term *= -x2 / k;
            sum += term / (2.0 * k + 1.0);
        }
        1.0 - 2.0 / PI.sqrt() * sum
    } else {
        // Lentz evaluation of erfc(x) = e^{−x²}/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + …))))
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..5000 {
            let ak = k as f64 / 2.0;
            d = x + ak * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + ak / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (PI.sqrt() * f)
    }
}

/// Spectral multiplier applied on the grid extended periodically to
/// `pad ×` its size. `symbol(β, λ)` is evaluated at the discrete wave
/// vectors; the zero mode uses `zero_mode` and Nyquist modes are dropped.
pub fn apply_symbol(
    grid: &PlaneGrid,
    v: &[f64],
    pad: usize,
    symbol: impl Fn(f64, f64) -> Complex64 + Sync,
    zero_mode: Complex64,
) -> Vec<Complex64> {
    let (n1, n3) = (grid.n1(), grid.n3());
    let (m1, m3) = (pad * n1, pad * n3);
    let mut buf = vec![Complex64::new(0.0, 0.0); m1 * m3];
    for k in 0..n3 {
        for i in 0..n1 {
            buf[k * m1 + i] = Complex64::new(v[k * n1 + i], 0.0);
        }
    }
    Fft2::new(m1, m3, FftDirection::Forward).process(&mut buf);
    let (p1, p3) = (m1 as f64 * grid.h1(), m3 as f64 * grid.h3());
    let freq = |i: usize, m: usize, p: f64| -> Option<f64> {
        let s = if i < m / 2 {
            i as i64
        } else if i > m / 2 {
            i as i64 - m as i64
        } else {
            return None;
        };
        Some(2.0 * PI * s as f64 / p)
    };
    buf.par_chunks_mut(m1).enumerate().for_each(|(k, row)| {
        let l = freq(k, m3, p3);
        for (i, b) in row.iter_mut().enumerate() {
            let s = match (freq(i, m1, p1), l) {
                (Some(0.0), Some(0.0)) => zero_mode,
                // transform convention: β = −k
                (Some(kb), Some(kl)) => symbol(-kb, -kl),
                _ => Complex64::new(0.0, 0.0),
            };
            *b *= s;
        }
    });
    Fft2::new(m1, m3, FftDirection::Inverse).process(&mut buf);
    let scale = 1.0 / (m1 * m3) as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n1 * n3];
    for k in 0..n3 {
        for i in 0..n1 {
            out[k * n1 + i] = buf[k * m1 + i] * scale;
        }
    }
    out
}

/// Padding factor of the spectral route.
pub const SPECTRAL_PAD: usize = 4;

/// `Q` through its symbol `2/ρ`, with the zero mode fixed by the lattice
/// constant so that periodic images leave only an `O(|x|²/P³)` error.
pub fn apply_q_spectral(grid: &PlaneGrid, v: &[f64]) -> Vec<f64> {
    let (p1, p3) = (
        (SPECTRAL_PAD * grid.n1()) as f64 * grid.h1(),
        (SPECTRAL_PAD * grid.n3()) as f64 * grid.h3(),
    );
    // periodic kernel (1/π)(1/r + C): remove (C/π)·∫φ
    let zero = Complex64::new(-lattice_constant(p1, p3) * p1 * p3 / PI, 0.0);
    apply_symbol(grid, v, SPECTRAL_PAD, |b, l| Complex64::new(2.0 / b.hypot(l), 0.0), zero)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

// ---------------------------------------------------------------------------
// Verification reports

fn rel_max(diff: impl Iterator<Item = f64>, reference: impl Iterator<Item = f64>) -> f64 {
    let d = diff.fold(0.0f64, |m, x| m.max(x.abs()));
    let r = reference.fold(0.0f64, |m, x| m.max(x.abs()));
    if d == 0.0 {
        0.0
    } else if r == 0.0 {
        f64::INFINITY
    } else {
        d / r
    }
}

/// Smooth bump `exp(1 − 1/(1 − t²))` for `|t| < 1`, with `t = r/radius`.
pub fn bump(r: f64, radius: f64) -> f64 {
    let t = r / radius;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

pub fn bump_derivative(x: f64, center: f64, radius: f64) -> f64 {
    let t = (x - center) / radius;
    if t.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - t * t;
        bump(x - center, radius) * (-2.0 * t / (w * w)) / radius
    }
}

fn gaussian(r2: f64, s: f64) -> f64 {
    (-0.5 * r2 / (s * s)).exp()
}

/// One row of the transform table: a symbol and its spatial counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub row: usize,
    pub symbol: &'static str,
    pub kernel: &'static str,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub n: usize,
    pub rows: Vec<TableRow>,
    /// Inverse transform of `1/ρ` at `(1, 0)`; should be `1/(2π)`.
    pub inverse_one_over_rho: f64,
}

impl TableReport {
    pub fn max(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.discrepancy))
    }
}

const TABLE_HALF: f64 = 8.0;
const TABLE_RADIUS: f64 = 5.0;

/// The transform table on the default 256² grid with a smooth compactly supported `φ`.
pub fn fourier_table_check() -> Result<TableReport> {
    fourier_table_check_n(256)
}

pub fn fourier_table_check_n(n: usize) -> Result<TableReport> {
    let grid = Arc::new(PlaneGrid::square(TABLE_HALF, n)?);
    let phi: Vec<f64> = (0..grid.len())
        .map(|p| {
            let (x1, x3) = (grid.x1(p % n), grid.x3(p / n));
            bump((x1 - 0.3).hypot(x3 + 0.2), TABLE_RADIUS)
        })
        .collect();
    let mut report = fourier_table_check_on(grid, &phi)?;
    report.inverse_one_over_rho = inverse_one_over_rho_at_unit(n)?;
    Ok(report)
}

/// Compares both sides of every row for the scalar field `phi`.
pub fn fourier_table_check_on(grid: Arc<PlaneGrid>, phi: &[f64]) -> Result<TableReport> {
    if phi.len() != grid.len() {
        return Err(CrackError::Mesh("field length does not match the grid".into()));
    }
    let plan = ConvolutionPlan::new(grid.clone());
    let dv = Derivs {
        grid: &grid,
        support: Support::FullPlane,
    };
    let d1 = dv.d1(phi)?;
    let d3 = dv.d3(phi)?;
    let d11 = dv.d11(phi)?;
    let d33 = dv.d33(phi)?;
    let d13 = dv.d13(phi)?;
    let lap = comb(&[(1.0, &d11), (1.0, &d33)]);
    let q1 = |v: &[f64]| plan.convolve(PlaneKernel::Odd1, v);
    let q3 = |v: &[f64]| plan.convolve(PlaneKernel::Odd3, v);
    let q = |v: &[f64]| plan.convolve(PlaneKernel::Inverse, v);
    let re = |v: Vec<f64>, c: f64| v.into_iter().map(|x| Complex64::new(c * x, 0.0)).collect::<Vec<_>>();
    let im = |v: Vec<f64>, c: f64| v.into_iter().map(|x| Complex64::new(0.0, c * x)).collect::<Vec<_>>();
    let z = |v: f64| Complex64::new(v, 0.0);

    type Sym = fn(f64, f64) -> f64;
    // (1/2π)(x_j/r²)⊛g = ½Q_j g;  (1/2π)(1/r)⊛g = ½Q g
    let rows: Vec<(&'static str, &'static str, Sym, f64, Vec<Complex64>)> = vec![
        ("(β/ρ²)β", "(1/2π)(x₁/r²)⊛∂₁φ", |b, l| b * b / (b * b + l * l), 0.5, re(q1(&d1), 0.5)),
        ("(λ/ρ²)λ", "(1/2π)(x₃/r²)⊛∂₃φ", |b, l| l * l / (b * b + l * l), 0.5, re(q3(&d3), 0.5)),
        ("(β/ρ²)λ", "(1/2π)(x₁/r²)⊛∂₃φ", |b, l| b * l / (b * b + l * l), 0.0, re(q1(&d3), 0.5)),
        ("(λ/ρ²)β", "(1/2π)(x₃/r²)⊛∂₁φ", |b, l| l * b / (b * b + l * l), 0.0, re(q3(&d1), 0.5)),
        ("(1/ρ)β", "(i/2π)(1/r)⊛∂₁φ", |b, l| b / b.hypot(l), 0.0, im(q(&d1), 0.5)),
        ("(1/ρ)λ", "(i/2π)(1/r)⊛∂₃φ", |b, l| l / b.hypot(l), 0.0, im(q(&d3), 0.5)),
        ("(1/ρ)β²", "−(1/2π)(1/r)⊛∂₁²φ", |b, l| b * b / b.hypot(l), 0.0, re(q(&d11), -0.5)),
        ("(1/ρ)λ²", "−(1/2π)(1/r)⊛∂₃²φ", |b, l| l * l / b.hypot(l), 0.0, re(q(&d33), -0.5)),
        ("(1/ρ)βλ", "−(1/2π)(1/r)⊛∂₁∂₃φ", |b, l| b * l / b.hypot(l), 0.0, re(q(&d13), -0.5)),
        ("ρ", "−(1/2π)(1/r)⊛Δφ", |b, l| b.hypot(l), 0.0, re(q(&lap), -0.5)),
    ];
    // odd symbols are imaginary in this transform convention: f̄ of a real odd
    // kernel carries a factor i, so β/ρ² ↔ (−i/2π) x₁/r² etc.
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(k, (symbol, kernel, s, zm, rhs))| {
            let lhs = apply_symbol(&grid, phi, SPECTRAL_PAD, |b, l| z(s(b, l)), z(zm));
            let discrepancy = rel_max(
                lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()),
                rhs.iter().map(|b| b.norm()),
            );
            TableRow {
                row: k + 1,
                symbol,
                kernel,
                discrepancy,
            }
        })
        .collect();
    Ok(TableReport {
        n: grid.n1(),
        rows,
        inverse_one_over_rho: f64::NAN,
    })
}

/// `F⁻¹[1/ρ]` at `(1, 0)` via the spectral `Q` applied to a narrow unit-mass
/// Gaussian (`Q ↔ 2/ρ`, so the value is half of `Q`).
fn inverse_one_over_rho_at_unit(n: usize) -> Result<f64> {
    // nodes sit at (i + ½)h − 2 with h = 4/n; the Gaussian sits on node n/2
    // and (1, 0) is n/4 nodes to the right
    let grid = PlaneGrid::square(2.0, n)?;
    let h = grid.h1();
    let c = grid.x1(n / 2);
    let s = 4.0 * h;
    let norm = 1.0 / (2.0 * PI * s * s);
    let v: Vec<f64> = (0..grid.len())
        .map(|p| {
            let (x1, x3) = (grid.x1(p % n), grid.x3(p / n));
            norm * gaussian((x1 - c).powi(2) + (x3 - c).powi(2), s)
        })
        .collect();
    let qv = apply_q_spectral(&grid, &v);
    let i = n / 2 + n / 4;
    // mollification by the Gaussian raises 1/r by (1 + s²/2) at r = 1
    Ok(0.5 * qv[grid.index(i, n / 2)] / (1.0 + 0.5 * s * s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCase {
    pub name: String,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub n: usize,
    pub cases: Vec<TheoremCase>,
}

impl TheoremReport {
    pub fn max(&self) -> f64 {
        self.cases.iter().fold(0.0, |m, c| m.max(c.error))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.cases.iter().find(|c| c.name == name).map(|c| c.error)
    }
}

/// Half-width of the `x₃` window used for `x₃`-independent data, in units
/// of the `x₁` extent; truncation errors scale like its inverse.
pub const PROFILE_X3_FACTOR: f64 = 1e4;

const PROFILE_X1: (f64, f64) = (-12.0, 12.0);

/// Grid for `x₃`-independent fields.
pub fn profile_grid(n: usize) -> Result<PlaneGrid> {
    let span = PROFILE_X1.1 - PROFILE_X1.0;
    PlaneGrid::new(PROFILE_X1, PROFILE_X3_FACTOR * span, n, n)
}

fn central_rows(grid: &PlaneGrid) -> Vec<usize> {
    (0..grid.n3())
        .filter(|&k| grid.x3(k).abs() <= 0.5 * grid.x3_half())
        .collect()
}

/// Theorems on the plane convolutions, on `n × n` grids:
/// the `x₃`-independent reductions `Q∂₁²φ = −2S∂₁φ`, `Q∂₁φ = −2Sφ`,
/// `Q₁∂₁φ = 2φ`, `Q₃∂₁φ = 0`, and for genuinely 2D fields
/// `Q₁∂₁φ + Q₃∂₃φ = 2φ`, `Q₃∂₁φ = Q₁∂₃φ`.
pub fn verify_theorems(n: usize) -> Result<TheoremReport> {
    let mut cases = Vec::new();

    // x₃-independent profiles supported in x₁ < 0
    let grid = Arc::new(profile_grid(n)?);
    let plan = ConvolutionPlan::new(grid.clone());
    let rows = central_rows(&grid);
    let profiles: [(&str, Box<dyn Fn(f64) -> f64>); 2] = [
        ("bump", Box::new(|x: f64| bump(x + 5.0, 4.0))),
        ("gaussian", Box::new(|x: f64| gaussian((x + 5.0).powi(2), 0.8))),
    ];
    for (label, prof) in profiles.iter() {
        let v: Vec<f64> = (0..grid.len()).map(|p| prof(grid.x1(p % n))).collect();
        let dv = Derivs {
            grid: &grid,
            support: Support::FullPlane,
        };
        let d1 = dv.d1(&v)?;
        let d11 = dv.d11(&v)?;
        let eval = grid.x1_nodes();
        let (s_phi, s_d1) = reference_hilbert(prof.as_ref(), &eval)?;
        let q_d11 = plan.convolve(PlaneKernel::Inverse, &d11);
        let q_d1 = plan.convolve(PlaneKernel::Inverse, &d1);
        let q1_d1 = plan.convolve(PlaneKernel::Odd1, &d1);
        let q3_d1 = plan.convolve(PlaneKernel::Odd3, &d1);
        let on_rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
            rows.iter()
                .flat_map(|&k| (0..n).map(move |i| (i, k)))
                .map(|(i, k)| f(i, k))
                .collect()
        };
        let idx = |i: usize, k: usize| grid.index(i, k);
        let e1 = rel_max(
            on_rows(&|i, k| q_d11[idx(i, k)] + 2.0 * s_d1[i]).into_iter(),
            s_d1.iter().map(|x| 2.0 * x),
        );
        let e2 = rel_max(
            on_rows(&|i, k| q_d1[idx(i, k)] + 2.0 * s_phi[i]).into_iter(),
            s_phi.iter().map(|x| 2.0 * x),
        );
        let e3 = rel_max(
            on_rows(&|i, k| q1_d1[idx(i, k)] - 2.0 * v[idx(i, k)]).into_iter(),
            v.iter().map(|x| 2.0 * x),
        );
        let e4 = rel_max(
            on_rows(&|i, k| q3_d1[idx(i, k)]).into_iter(),
            q1_d1.iter().copied(),
        );
        cases.push(TheoremCase { name: format!("Q d11 = -2 S d1 ({label})"), error: e1 });
        cases.push(TheoremCase { name: format!("Q d1 = -2 S ({label})"), error: e2 });
        cases.push(TheoremCase { name: format!("Q1 d1 = 2 (profile, {label})"), error: e3 });
        cases.push(TheoremCase { name: format!("Q3 d1 = 0 (profile, {label})"), error: e4 });
    }

    // genuinely two-dimensional fields
    let grid = Arc::new(PlaneGrid::square(TABLE_HALF, n)?);
    let plan = ConvolutionPlan::new(grid.clone());
    let fields: [(&str, Box<dyn Fn(f64, f64) -> f64>); 2] = [
        ("bump", Box::new(|x: f64, y: f64| bump((x + 0.5).hypot(y - 0.3), TABLE_RADIUS))),
        ("gaussian", Box::new(|x: f64, y: f64| gaussian((x - 0.4).powi(2) + (y + 0.7).powi(2), 1.0))),
    ];
    for (label, f) in fields.iter() {
        let v: Vec<f64> = (0..grid.len()).map(|p| f(grid.x1(p % n), grid.x3(p / n))).collect();
        let dv = Derivs {
            grid: &grid,
            support: Support::FullPlane,
        };
        let d1 = dv.d1(&v)?;
        let d3 = dv.d3(&v)?;
        let q1_d1 = plan.convolve(PlaneKernel::Odd1, &d1);
        let q3_d3 = plan.convolve(PlaneKernel::Odd3, &d3);
        let q3_d1 = plan.convolve(PlaneKernel::Odd3, &d1);
        let q1_d3 = plan.convolve(PlaneKernel::Odd1, &d3);
        let e_sum = rel_max(
            (0..v.len()).map(|p| q1_d1[p] + q3_d3[p] - 2.0 * v[p]),
            v.iter().map(|x| 2.0 * x),
        );
        let e_swap = rel_max((0..v.len()).map(|p| q3_d1[p] - q1_d3[p]), q3_d1.iter().copied());
        cases.push(TheoremCase { name: format!("Q1 d1 + Q3 d3 = 2 ({label})"), error: e_sum });
        cases.push(TheoremCase { name: format!("Q3 d1 = Q1 d3 ({label})"), error: e_swap });
    }
    Ok(TheoremReport { n, cases })
}

/// Reference `Sφ` and `S∂₁φ` from the one-dimensional module, on a fine
/// uniform mesh of the crack faces.
fn reference_hilbert(profile: &dyn Fn(f64) -> f64, eval: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    use crate::mesh::{GridFunction, SemiAxisMesh};
    use crate::singular_ops::apply_cauchy_at;
    let mesh = Arc::new(SemiAxisMesh::uniform(PROFILE_X1.0, -1e-3, 8192)?);
    let h = mesh.nodes()[1] - mesh.nodes()[0];
    let vals: Vec<f64> = mesh.nodes().iter().map(|&x| profile(x)).collect();
    let mut dvals = vec![0.0; vals.len()];
    for i in 0..vals.len() {
        let f = |k: i64| vals[(i as i64 + k).clamp(0, vals.len() as i64 - 1) as usize];
        dvals[i] = (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h);
    }
    let phi = GridFunction::new(mesh.clone(), vals, 0.0, f64::INFINITY)?;
    let dphi = GridFunction::new(mesh, dvals, 0.0, f64::INFINITY)?;
    Ok((apply_cauchy_at(&phi, eval)?, apply_cauchy_at(&dphi, eval)?))
}

/// Outcome of embedding a two-dimensional solution pair in 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub n: usize,
    /// Crack-side residual of the antiplane component relative to `max|⟨p₃⟩|`.
    pub mode3_crack: f64,
    /// Crack-side residual of the in-plane components relative to `max|⟨p⟩|`.
    pub plane_crack: f64,
    /// Traction ahead of the tip, 3D against 2D, relative to the 2D maximum.
    pub mode3_ahead: f64,
    pub plane_ahead: f64,
}

impl ReductionReport {
    pub fn max(&self) -> f64 {
        self.mode3_crack
            .max(self.plane_crack)
            .max(self.mode3_ahead)
            .max(self.plane_ahead)
    }
}

/// Smooth `x₃`-independent opening and skew load; the symmetric load and the
/// traction ahead come from the two-dimensional operators. The 3D identities
/// must then hold for the embedded fields.
pub fn verify_reduction(mat: &BimaterialConstants, n: usize) -> Result<ReductionReport> {
    use crate::field::LineField;
    use crate::mesh::{GridFunction, SemiAxisMesh};
    use crate::mode12::{apply_terms, apply_terms_ahead, assemble_plane_operators};

    let grid = Arc::new(profile_grid(n)?);
    let h = grid.h1();
    let neg = grid.negative_columns();
    // fine mesh containing every negative grid node: x = x₁_lo + j h/16
    const REFINE: usize = 16;
    let fine_nodes: Vec<f64> = (1..REFINE * neg)
        .map(|j| PROFILE_X1.0 + j as f64 * h / REFINE as f64)
        .collect();
    let coarse = |j: usize| (j + 1) % REFINE == REFINE / 2;
    let mesh = Arc::new(SemiAxisMesh::from_nodes(fine_nodes.clone())?);

    let opening: [(f64, f64, f64); 3] = [(0.7, -4.0, 3.0), (1.3, -6.0, 4.5), (1.0, -5.0, 4.0)];
    let skew: [(f64, f64, f64); 3] = [(0.5, -5.0, 3.0), (-0.8, -4.5, 2.5), (0.6, -5.5, 3.0)];
    let eval_bump = |(a, c, r): (f64, f64, f64), x: f64| a * bump(x - c, r);
    let line = |vals: Vec<f64>| -> Result<LineField> {
        Ok(LineField::from_regular(GridFunction::new(
            mesh.clone(),
            vals,
            0.0,
            f64::INFINITY,
        )?))
    };
    let du: Vec<LineField> = opening
        .iter()
        .map(|&(a, c, r)| line(fine_nodes.iter().map(|&x| a * bump_derivative(x, c, r)).collect()))
        .collect::<Result<_>>()?;
    let jf: Vec<LineField> = skew
        .iter()
        .map(|&b| line(fine_nodes.iter().map(|&x| eval_bump(b, x)).collect()))
        .collect::<Result<_>>()?;

    let spec = assemble_plane_operators(mat);
    let du_pair = [du[0].clone(), du[1].clone()];
    let j_pair = [jf[0].clone(), jf[1].clone()];
    let bu = apply_terms(&spec.b_s, &du_pair)?;
    let aj = apply_terms(&spec.a_s, &j_pair)?;
    let mut p_sym: [Vec<f64>; 3] = Default::default();
    for c in 0..2 {
        let b = bu[c].values_at_nodes()?;
        let a = aj[c].values_at_nodes()?;
        p_sym[c] = b.iter().zip(&a).map(|(b, a)| b - a).collect();
    }
    let s3 = du[2].s_s()?.values_at_nodes()?;
    let j3: Vec<f64> = fine_nodes.iter().map(|&x| eval_bump(skew[2], x)).collect();
    p_sym[2] = s3
        .iter()
        .zip(&j3)
        .map(|(s, j)| -s / mat.antiplane() - 0.5 * mat.eta * j)
        .collect();
    let sampled: [Vec<f64>; 3] = [0, 1, 2].map(|c| {
        p_sym[c]
            .iter()
            .enumerate()
            .filter(|(j, _)| coarse(*j))
            .map(|(_, v)| *v)
            .collect::<Vec<f64>>()
    });
    debug_assert_eq!(sampled[0].len(), neg);

    let ahead_x: Vec<f64> = grid.x1_nodes()[neg..].to_vec();
    let plane_ahead_2d = {
        let b = apply_terms_ahead(&spec.b_c, &du_pair, &ahead_x)?;
        let a = apply_terms_ahead(&spec.a_c, &j_pair, &ahead_x)?;
        [0, 1].map(|c| b[c].iter().zip(&a[c]).map(|(b, a)| b - a).collect::<Vec<f64>>())
    };
    let mode3_ahead_2d: Vec<f64> = du[2]
        .cauchy_at(&ahead_x)?
        .into_iter()
        .map(|s| -s / mat.antiplane())
        .collect();

    let u3d = PlaneGridFunction::from_profile(grid.clone(), Support::CrackFaces, |x| {
        if x < 0.0 {
            opening.map(|b| eval_bump(b, x))
        } else {
            [0.0; 3]
        }
    })?;
    let j3d = PlaneGridFunction::from_profile(grid.clone(), Support::CrackFaces, |x| {
        if x < 0.0 {
            skew.map(|b| eval_bump(b, x))
        } else {
            [0.0; 3]
        }
    })?;
    let mut p3d = PlaneGridFunction::zeros(grid.clone(), Support::CrackFaces);
    for k in 0..grid.n3() {
        for i in 0..neg {
            for c in 0..3 {
                p3d.values[c][grid.index(i, k)] = sampled[c][i];
            }
        }
    }
    let res = forward_identity_3d(&u3d, &p3d, &j3d, mat)?;
    let rows = res.trusted_rows();
    let pmax = |cs: &[usize]| {
        cs.iter()
            .flat_map(|&c| sampled[c].iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    };
    let mode3_crack = res.max_crack_component(2) / pmax(&[2]);
    let plane_crack = res.max_crack_component(0).max(res.max_crack_component(1)) / pmax(&[0, 1]);
    let ahead_err = |cs: &[usize], refs: &[&Vec<f64>]| {
        let mut d = 0.0f64;
        let mut r = 0.0f64;
        for (c, reference) in cs.iter().zip(refs) {
            for &k in &rows {
                for (i, want) in reference.iter().enumerate() {
                    let got = res.traction_ahead.values[*c][grid.index(neg + i, k)];
                    d = d.max((got - want).abs());
                    r = r.max(want.abs());
                }
            }
        }
        d / r
    };
    Ok(ReductionReport {
        n,
        mode3_crack,
        plane_crack,
        mode3_ahead: ahead_err(&[2], &[&mode3_ahead_2d]),
        plane_ahead: ahead_err(&[0, 1], &[&plane_ahead_2d[0], &plane_ahead_2d[1]]),
    })
}
