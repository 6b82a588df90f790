//! Crack-line fields with exact point singularities.
//!
//! A [`LineField`] is a sampled [`GridFunction`] plus Dirac masses `w·δ(x−p)`
//! and simple poles `c/(π(x−p))`. Point loads generate exactly these two
//! singularities, and the Cauchy operators map them into each other in closed
//! form, so loads are never smoothed onto the mesh.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CrackError, Result};
use crate::mesh::{integrate_from_tip, GridFunction, SemiAxisMesh};
use crate::quadrature::{gauss8, graded_unit};
use crate::singular_ops::{apply_cauchy_at, apply_k, apply_s_s, k_of_point_mass};

/// `weight·δ(x − position)`, `position < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub position: f64,
    pub weight: f64,
}

/// `coefficient/(π(x − position))`, `position < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub position: f64,
    pub coefficient: f64,
}

/// `coefficient·(−x)^{−exponent}` on the whole crack line, `0 < exponent < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

/// `Re[c·(−x)^{−β}·ℓ/(ℓ − x)]` with `β = 1/2 + iε`: the square-root tip
/// singularity (oscillating when `ε ≠ 0`) with a cutoff at the length `ℓ`
/// that keeps every transform in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipSingular {
    pub coefficient: Complex64,
    pub epsilon: f64,
    pub scale: f64,
}

impl TipSingular {
    fn beta(&self) -> Complex64 {
        Complex64::new(0.5, self.epsilon)
    }

    /// `t^{−β}` for `t > 0`.
    fn power(&self, t: f64) -> Complex64 {
        (-self.beta() * t.ln()).exp()
    }

    /// `(sin πβ, cot πβ)`.
    fn trig(&self) -> (Complex64, Complex64) {
        let a = self.beta() * PI;
        (a.sin(), a.cos() / a.sin())
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = -x;
        let l = self.scale;
        (self.coefficient * self.power(t) * (l / (l + t))).re
    }

    /// The bounded remainder `−Re[c·ℓ^{1−β}·w/sin πβ]/(ℓ − x)` that `S^(s)`
    /// (`w = 1`) or `K` (`w = cot πβ + ln(ℓ/(−x))/π`) adds to the rescaled
    /// singular term.
    fn remainder(&self, x: f64, with_log: bool) -> f64 {
        let t = -x;
        let l = self.scale;
        let (sin, cot) = self.trig();
        let w = if with_log {
            cot + (l / t).ln() / PI
        } else {
            Complex64::new(1.0, 0.0)
        };
        -(self.coefficient * self.power(l) * l * w / sin).re / (l + t)
    }

    /// Cauchy transform at `x > 0`.
    fn cauchy_ahead(&self, x: f64) -> f64 {
        let l = self.scale;
        let (sin, _) = self.trig();
        let ratio = if (x - l).abs() < 1e-8 * l {
            self.beta() * self.power(l) / l
        } else {
            (self.power(x) - self.power(l)) / (l - x)
        };
        (self.coefficient * ratio * l / sin).re
    }

    /// `−∫_x^0` of the term at each abscissa; `xs` must be increasing.
    fn cumulative(&self, xs: &[f64]) -> Vec<f64> {
        // ∫_0^X t^{−β}ℓ/(ℓ+t) dt = 2ℓ^{1−β}∫_0^{√(X/ℓ)} v^{−2iε}/(1+v²) dv
        let l = self.scale;
        let eps = self.epsilon;
        let f = |v: f64| Complex64::from_polar(1.0, -2.0 * eps * v.ln()) / (1.0 + v * v);
        let front = self.coefficient * self.power(l) * l * 2.0;
        let mut out = vec![0.0; xs.len()];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut prev: Option<f64> = None;
        for i in (0..xs.len()).rev() {
            let v = (-xs[i] / l).sqrt();
            acc += match prev {
                None => {
                    let re = v * graded_unit(|u| f(v * u).re);
                    let im = v * graded_unit(|u| f(v * u).im);
                    Complex64::new(re, im)
                }
                Some(p) => {
                    let g = gauss8();
                    Complex64::new(g.integrate(p, v, |u| f(u).re), g.integrate(p, v, |u| f(u).im))
                }
            };
            prev = Some(v);
            out[i] = -(front * acc).re;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    pub regular: GridFunction,
    pub masses: Vec<PointMass>,
    pub poles: Vec<Pole>,
    pub powers: Vec<PowerLaw>,
    pub tips: Vec<TipSingular>,
}

impl LineField {
    pub fn from_regular(regular: GridFunction) -> Self {
        LineField {
            regular,
            masses: Vec::new(),
            poles: Vec::new(),
            powers: Vec::new(),
            tips: Vec::new(),
        }
    }

    pub fn zeros(mesh: Arc<SemiAxisMesh>) -> Self {
        Self::from_regular(GridFunction::zeros(mesh))
    }

    pub fn point_mass(mesh: Arc<SemiAxisMesh>, position: f64, weight: f64) -> Result<Self> {
        if !(position < 0.0) {
            return Err(CrackError::validation(
                "position",
                format!("point loads must act on the crack faces, got {position}"),
            ));
        }
        let mut f = Self::zeros(mesh);
        f.masses.push(PointMass { position, weight });
        Ok(f)
    }

    pub fn power_law(mesh: Arc<SemiAxisMesh>, coefficient: f64, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(CrackError::validation(
                "exponent",
                format!("must lie in (0, 1), got {exponent}"),
            ));
        }
        let mut f = Self::zeros(mesh);
        f.powers.push(PowerLaw {
            coefficient,
            exponent,
        });
        Ok(f)
    }

    pub fn mesh(&self) -> &Arc<SemiAxisMesh> {
        &self.regular.mesh
    }

    pub fn scaled(&self, a: f64) -> LineField {
        LineField {
            regular: self.regular.scaled(a),
            masses: self
                .masses
                .iter()
                .map(|m| PointMass {
                    position: m.position,
                    weight: a * m.weight,
                })
                .collect(),
            poles: self
                .poles
                .iter()
                .map(|p| Pole {
                    position: p.position,
                    coefficient: a * p.coefficient,
                })
                .collect(),
            powers: self
                .powers
                .iter()
                .map(|p| PowerLaw {
                    coefficient: a * p.coefficient,
                    exponent: p.exponent,
                })
                .collect(),
            tips: self
                .tips
                .iter()
                .map(|t| TipSingular {
                    coefficient: t.coefficient * a,
                    ..*t
                })
                .collect(),
        }
    }

    /// `a·self + b·other`. Zero-weight regular parts do not degrade the
    /// exponents of the other operand.
    pub fn lin_comb(&self, a: f64, other: &LineField, b: f64) -> Result<LineField> {
        let regular = match (is_zero(&self.regular), is_zero(&other.regular)) {
            (true, _) => other.regular.scaled(b),
            (false, true) => self.regular.scaled(a),
            _ => self.regular.lin_comb(a, &other.regular, b)?,
        };
        let s = self.scaled(a);
        let o = other.scaled(b);
        let mut out = LineField {
            regular,
            masses: s.masses,
            poles: s.poles,
            powers: s.powers,
            tips: s.tips,
        };
        out.masses.extend(o.masses);
        out.poles.extend(o.poles);
        out.powers.extend(o.powers);
        out.tips.extend(o.tips);
        out.merge();
        Ok(out)
    }

    fn merge(&mut self) {
        let mut masses: Vec<PointMass> = Vec::new();
        for m in self.masses.drain(..) {
            match masses.iter_mut().find(|q| q.position == m.position) {
                Some(q) => q.weight += m.weight,
                None => masses.push(m),
            }
        }
        masses.retain(|m| m.weight != 0.0);
        let mut poles: Vec<Pole> = Vec::new();
        for p in self.poles.drain(..) {
            match poles.iter_mut().find(|q| q.position == p.position) {
                Some(q) => q.coefficient += p.coefficient,
                None => poles.push(p),
            }
        }
        poles.retain(|p| p.coefficient != 0.0);
        let mut powers: Vec<PowerLaw> = Vec::new();
        for p in self.powers.drain(..) {
            match powers.iter_mut().find(|q| q.exponent == p.exponent) {
                Some(q) => q.coefficient += p.coefficient,
                None => powers.push(p),
            }
        }
        powers.retain(|p| p.coefficient != 0.0);
        let mut tips: Vec<TipSingular> = Vec::new();
        for t in self.tips.drain(..) {
            match tips.iter_mut().find(|q| q.epsilon == t.epsilon && q.scale == t.scale) {
                Some(q) => q.coefficient += t.coefficient,
                None => tips.push(t),
            }
        }
        tips.retain(|t| t.coefficient != Complex64::new(0.0, 0.0));
        self.tips = tips;
        self.powers = powers;
        self.masses = masses;
        self.poles = poles;
    }

    /// Pointwise values of the regular part plus the poles. Masses have no
    /// pointwise value and are skipped; a node on a pole is an error.
    pub fn values_at_nodes(&self) -> Result<Vec<f64>> {
        let mut v = self.regular.values.clone();
        for (x, out) in self.regular.nodes().iter().zip(v.iter_mut()) {
            for p in &self.poles {
                if *x == p.position {
                    return Err(CrackError::Pole { at: *x });
                }
                *out += p.coefficient / (PI * (x - p.position));
            }
            for p in &self.powers {
                *out += p.coefficient * (-x).powf(-p.exponent);
            }
            for t in &self.tips {
                *out += t.value(*x);
            }
        }
        Ok(v)
    }

    /// `S^(s)` on the same mesh.
    pub fn s_s(&self) -> Result<LineField> {
        let mesh = self.mesh().clone();
        let mut regular = if is_zero(&self.regular) {
            GridFunction::zeros(mesh.clone())
        } else {
            apply_s_s(&self.regular, mesh.clone())?
        };
        let mut masses = Vec::new();
        let mut poles = Vec::new();
        for m in &self.masses {
            poles.push(Pole {
                position: m.position,
                coefficient: m.weight,
            });
        }
        for p in &self.poles {
            // S^(s) of a pole is −δ plus the regular Kδ
            masses.push(PointMass {
                position: p.position,
                weight: -p.coefficient,
            });
            let kd = k_of_point_mass_grid(mesh.clone(), p.position)?;
            regular = add_regular(&regular, &kd.scaled(p.coefficient))?;
        }
        let powers = self
            .powers
            .iter()
            .map(|p| PowerLaw {
                coefficient: p.coefficient / (PI * p.exponent).tan(),
                exponent: p.exponent,
            })
            .collect();
        let mut tips = Vec::new();
        for t in &self.tips {
            let r = GridFunction::from_fn(mesh.clone(), 0.0, 1.0, |x| t.remainder(x, false))?;
            regular = add_regular(&regular, &r)?;
            tips.push(TipSingular {
                coefficient: t.coefficient * t.trig().1,
                ..*t
            });
        }
        let mut out = LineField {
            regular,
            masses,
            poles,
            powers,
            tips,
        };
        out.merge();
        Ok(out)
    }

    /// `K` on the same mesh; the result is regular.
    pub fn k(&self) -> Result<LineField> {
        let mesh = self.mesh().clone();
        let mut regular = if is_zero(&self.regular) {
            GridFunction::zeros(mesh.clone())
        } else {
            apply_k(&self.regular)?
        };
        for m in &self.masses {
            let kd = k_of_point_mass_grid(mesh.clone(), m.position)?;
            regular = add_regular(&regular, &kd.scaled(m.weight))?;
        }
        for p in &self.poles {
            let kp = GridFunction::from_fn(mesh.clone(), 0.0, 1.0, |x| k_of_pole(-p.position, x))?;
            regular = add_regular(&regular, &kp.scaled(p.coefficient))?;
        }
        let mut tips = Vec::new();
        for t in &self.tips {
            let r = GridFunction::from_fn(mesh.clone(), 0.0, 1.0, |x| t.remainder(x, true))?;
            regular = add_regular(&regular, &r)?;
            let sin = t.trig().0;
            tips.push(TipSingular {
                coefficient: t.coefficient / (sin * sin),
                ..*t
            });
        }
        let mut out = LineField::from_regular(regular);
        out.tips = tips;
        out.powers = self
            .powers
            .iter()
            .map(|p| PowerLaw {
                coefficient: p.coefficient / (PI * p.exponent).sin().powi(2),
                exponent: p.exponent,
            })
            .collect();
        Ok(out)
    }

    /// Cauchy transform at points ahead of the tip (`S^(c)`) or on the crack
    /// faces away from any mass or pole.
    pub fn cauchy_at(&self, eval: &[f64]) -> Result<Vec<f64>> {
        let mut out = if is_zero(&self.regular) {
            vec![0.0; eval.len()]
        } else {
            apply_cauchy_at(&self.regular, eval)?
        };
        for (x, v) in eval.iter().zip(out.iter_mut()) {
            for m in &self.masses {
                if *x == m.position {
                    return Err(CrackError::Pole { at: *x });
                }
                *v += m.weight / (PI * (x - m.position));
            }
            for p in &self.poles {
                if *x <= 0.0 {
                    return Err(CrackError::Unsupported(
                        "Cauchy transform of a pole on the crack faces".into(),
                    ));
                }
                let a = -p.position;
                *v += p.coefficient * (a / x).ln() / (PI * PI * (x + a));
            }
            for p in &self.powers {
                let t = PI * p.exponent;
                *v += if *x > 0.0 {
                    p.coefficient * x.powf(-p.exponent) / t.sin()
                } else {
                    p.coefficient * (-x).powf(-p.exponent) / t.tan()
                };
            }
            for t in &self.tips {
                *v += if *x > 0.0 {
                    t.cauchy_ahead(*x)
                } else {
                    let scaled = TipSingular {
                        coefficient: t.coefficient * t.trig().1,
                        ..*t
                    };
                    scaled.value(*x) + t.remainder(*x, false)
                };
            }
        }
        Ok(out)
    }

    /// `−∫_x^0 f dξ` at every node, i.e. the opening whose derivative is `f`
    /// and which vanishes at the tip. A mass on a node contributes half its
    /// jump there.
    pub fn cumulative_from_tip(&self) -> Vec<f64> {
        let mut out: Vec<f64> = integrate_from_tip(&self.regular)
            .into_iter()
            .map(|v| -v)
            .collect();
        for (x, v) in self.regular.nodes().iter().zip(out.iter_mut()) {
            for m in &self.masses {
                if *x < m.position {
                    *v -= m.weight;
                } else if *x == m.position {
                    *v -= 0.5 * m.weight;
                }
            }
            for p in &self.poles {
                let a = -p.position;
                if *x != p.position {
                    *v += p.coefficient / PI * ((x + a).abs() / a).ln();
                }
            }
            for p in &self.powers {
                let e = 1.0 - p.exponent;
                *v -= p.coefficient * (-x).powf(e) / e;
            }
        }
        let x = self.regular.nodes();
        for t in &self.tips {
            for (v, c) in out.iter_mut().zip(t.cumulative(x)) {
                *v += c;
            }
        }
        out
    }
}

pub(crate) fn is_zero(g: &GridFunction) -> bool {
    g.values.iter().all(|&v| v == 0.0)
}

pub(crate) fn add_regular(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    if is_zero(a) {
        Ok(b.clone())
    } else if is_zero(b) {
        Ok(a.clone())
    } else {
        a.lin_comb(1.0, b, 1.0)
    }
}

/// `K[1/(π(· + a))](x) = S^(s)Kδ(· + a) = ln²(−x/a)/(2π³(x + a))`, `x < 0`.
pub fn k_of_pole(a: f64, x: f64) -> f64 {
    let y = -x / a;
    if (y - 1.0).abs() < 1e-12 {
        return 0.0;
    }
    y.ln().powi(2) / (2.0 * PI.powi(3) * (x + a))
}

/// `Kδ(· − p)` sampled on the mesh.
pub fn k_of_point_mass_grid(mesh: Arc<SemiAxisMesh>, position: f64) -> Result<GridFunction> {
    let a = -position;
    GridFunction::from_fn(mesh, 0.0, 1.0, |x| k_of_point_mass(a, x))
}
