//! Elastic half-space data and the scalar bimaterial constants derived from
//! the upper (`+`, x₂ > 0) and lower (`-`, x₂ < 0) materials.

use crate::error::{CrackError, Result};

/// Isotropic elastic half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticHalfSpace {
    pub shear_modulus: f64,
    pub poisson_ratio: f64,
}

impl ElasticHalfSpace {
    pub fn new(shear_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let m = ElasticHalfSpace {
            shear_modulus,
            poisson_ratio,
        };
        m.validate("")?;
        Ok(m)
    }

    /// Checks the admissible ranges. `prefix` is prepended to field names in
    /// the error (e.g. `materials.upper.`).
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.shear_modulus.is_finite() && self.shear_modulus > 0.0) {
            return Err(CrackError::validation(
                format!("{prefix}shear_modulus"),
                format!("must be positive, got {}", self.shear_modulus),
            ));
        }
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio < 0.5) {
            return Err(CrackError::validation(
                format!("{prefix}poisson_ratio"),
                format!("must lie in (-1, 0.5), got {}", self.poisson_ratio),
            ));
        }
        Ok(())
    }
}

/// Scalar constants of the interface. `b`, `e`, `d`, `f` are compliances;
/// `alpha`, `gamma`, `eta`, `p` are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimaterialConstants {
    pub b: f64,
    pub e: f64,
    pub d: f64,
    pub f: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub eta: f64,
    pub p: f64,
}

impl BimaterialConstants {
    /// `b + e`, the antiplane compliance.
    pub fn antiplane(&self) -> f64 {
        self.b + self.e
    }

    /// `b² − d²`, the common denominator of the in-plane operators.
    pub fn plane_det(&self) -> f64 {
        self.b * self.b - self.d * self.d
    }

    pub fn is_homogeneous(&self) -> bool {
        self.d == 0.0 && self.f == 0.0 && self.eta == 0.0 && self.alpha == 0.0
    }
}

/// Evaluates every interface constant from the two materials.
pub fn compute_constants(
    upper: &ElasticHalfSpace,
    lower: &ElasticHalfSpace,
) -> Result<BimaterialConstants> {
    upper.validate("upper.")?;
    lower.validate("lower.")?;
    let (mp, np) = (upper.shear_modulus, upper.poisson_ratio);
    let (mm, nm) = (lower.shear_modulus, lower.poisson_ratio);

    let b = (1.0 - np) / mp + (1.0 - nm) / mm;
    let e = np / mp + nm / mm;
    let f = np / mp - nm / mm;
    let d = (1.0 - 2.0 * np) / (2.0 * mp) - (1.0 - 2.0 * nm) / (2.0 * mm);
    let eta = (mm - mp) / (mm + mp);
    let den = mm * (1.0 - np) + mp * (1.0 - nm);
    let alpha = (mm * (1.0 - np) - mp * (1.0 - nm)) / den;
    let gamma = (mm * (1.0 - 2.0 * np) + mp * (1.0 - 2.0 * nm)) / (2.0 * den);
    let p = b * b / (b * b - d * d);

    let c = BimaterialConstants {
        b,
        e,
        d,
        f,
        alpha,
        gamma,
        eta,
        p,
    };
    debug_assert!(c.b > 0.0 && c.b + c.e > 0.0 && c.plane_det() > 0.0);
    // p = b²/(b²−d²) can only be ≥ 1.
    debug_assert!(c.p >= 1.0);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(mu: f64, nu: f64) -> ElasticHalfSpace {
        ElasticHalfSpace::new(mu, nu).unwrap()
    }

    #[test]
    fn homogeneous_constants() {
        let c = compute_constants(&m(1.0, 0.3), &m(1.0, 0.3)).unwrap();
        assert_eq!(c.eta, 0.0);
        assert_eq!(c.d, 0.0);
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.f, 0.0);
        assert!((c.b - 1.4).abs() < 1e-15);
        assert!((c.gamma - 2.0 / 7.0).abs() < 1e-15);
        assert_eq!(c.p, 1.0);
    }

    #[test]
    fn example_bimaterial() {
        let c = compute_constants(&m(1.0, 0.3), &m(2.0, 0.2)).unwrap();
        assert!((c.b - 1.1).abs() < 1e-14);
        assert!((c.e - 0.4).abs() < 1e-14);
        assert!((c.d - 0.05).abs() < 1e-14);
        assert!((c.f - 0.2).abs() < 1e-14);
        assert!((c.eta - 1.0 / 3.0).abs() < 1e-14);
        assert!((c.alpha - 3.0 / 11.0).abs() < 1e-14);
        assert!((c.gamma - 7.0 / 22.0).abs() < 1e-14);
        assert!((c.p - 1.21 / 1.2075).abs() < 1e-14);
        assert!(c.p >= 1.0);
    }

    #[test]
    fn rejects_bad_materials() {
        let err = ElasticHalfSpace::new(-1.0, 0.3).unwrap_err();
        assert!(matches!(err, CrackError::Validation { ref field, .. } if field == "shear_modulus"));
        let err = ElasticHalfSpace::new(1.0, 0.5).unwrap_err();
        assert!(matches!(err, CrackError::Validation { ref field, .. } if field == "poisson_ratio"));
        let bad = ElasticHalfSpace {
            shear_modulus: 1.0,
            poisson_ratio: -1.0,
        };
        let err = compute_constants(&m(1.0, 0.2), &bad).unwrap_err();
        assert!(matches!(err, CrackError::Validation { ref field, .. } if field == "lower.poisson_ratio"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn material() -> impl Strategy<Value = ElasticHalfSpace> {
            (0.05f64..50.0, -0.95f64..0.49).prop_map(|(mu, nu)| ElasticHalfSpace {
                shear_modulus: mu,
                poisson_ratio: nu,
            })
        }

        proptest! {
            #[test]
            fn compliance_sum_identity(up in material(), lo in material()) {
                let c = compute_constants(&up, &lo).unwrap();
                let rhs = 1.0 / up.shear_modulus + 1.0 / lo.shear_modulus;
                prop_assert!((c.b + c.e - rhs).abs() <= 4.0 * f64::EPSILON * rhs);
            }

            #[test]
            fn swap_antisymmetry(up in material(), lo in material()) {
                let c = compute_constants(&up, &lo).unwrap();
                let s = compute_constants(&lo, &up).unwrap();
                prop_assert_eq!(c.b, s.b);
                prop_assert_eq!(c.e, s.e);
                prop_assert!((c.eta + s.eta).abs() < 1e-15);
                prop_assert!((c.d + s.d).abs() < 1e-14 * (1.0 + c.b));
                prop_assert!((c.f + s.f).abs() < 1e-14 * (1.0 + c.e.abs()));
                prop_assert!((c.alpha + s.alpha).abs() < 1e-15);
            }

            #[test]
            fn admissible_ranges(up in material(), lo in material()) {
                let c = compute_constants(&up, &lo).unwrap();
                prop_assert!(c.b > 0.0 && c.b + c.e > 0.0 && c.plane_det() > 0.0);
                prop_assert!(c.p >= 1.0);
                prop_assert!(c.eta.abs() < 1.0 && c.alpha.abs() < 1.0);
            }
        }
    }
}
