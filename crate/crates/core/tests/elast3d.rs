use std::f64::consts::PI;
use std::sync::Arc;

use crackops::bimaterial::{compute_constants, BimaterialConstants, ElasticHalfSpace};
use crackops::elast3d::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn example_material() -> BimaterialConstants {
    compute_constants(
        &ElasticHalfSpace::new(1.0, 0.3).unwrap(),
        &ElasticHalfSpace::new(2.0, 0.2).unwrap(),
    )
    .unwrap()
}

fn d0_material() -> BimaterialConstants {
    compute_constants(
        &ElasticHalfSpace::new(1.0, 0.25).unwrap(),
        &ElasticHalfSpace::new(2.0, 0.0).unwrap(),
    )
    .unwrap()
}

fn homogeneous(mu: f64, nu: f64) -> BimaterialConstants {
    let m = ElasticHalfSpace::new(mu, nu).unwrap();
    compute_constants(&m, &m).unwrap()
}

fn max_norm(m: &nalgebra::Matrix3<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

#[test]
fn antiplane_entry_of_g() {
    let mat = example_material();
    for beta in [0.3, -2.0, 7.5] {
        let s = assemble_symbols(&mat, beta, 0.0).unwrap();
        let g33 = s.g[(2, 2)];
        assert!((g33.re + (mat.b + mat.e)).abs() < 1e-14 && g33.im == 0.0, "{g33}");
    }
}

#[test]
fn rejects_zero_wave_vector() {
    assert!(assemble_symbols(&example_material(), 0.0, 0.0).is_err());
    assert!(assemble_symbols(&example_material(), f64::NAN, 1.0).is_err());
}

proptest! {
    #[test]
    fn structure_matrices_annihilate(beta in -50.0f64..50.0, lambda in -50.0f64..50.0) {
        prop_assume!(beta.hypot(lambda) > 1e-6);
        // zero up to the rounding of the cubic entries
        let p = e2_matrix(beta, lambda) * e3_matrix(beta, lambda);
        let tol = 4.0 * f64::EPSILON * beta.hypot(lambda).powi(3);
        prop_assert!(p.iter().all(|v| v.abs() <= tol), "{p}");
    }

    // B = ρ G⁻¹ and A = F G⁻¹ follow from the weight-function relations.
    #[test]
    fn symbols_consistent_with_weight_function_relations(
        beta in -10.0f64..10.0, lambda in -10.0f64..10.0, swap in any::<bool>()
    ) {
        prop_assume!(beta.hypot(lambda) > 1e-3);
        let mut mat = example_material();
        if swap {
            mat = compute_constants(
                &ElasticHalfSpace::new(2.0, 0.2).unwrap(),
                &ElasticHalfSpace::new(1.0, 0.3).unwrap(),
            ).unwrap();
        }
        let s = assemble_symbols(&mat, beta, lambda).unwrap();
        let gi = s.g.try_inverse().unwrap();
        let b = gi * Complex64::from(s.rho);
        let a = s.f * gi;
        prop_assert!(max_norm(&(s.b - b)) < 1e-12 * max_norm(&s.b));
        prop_assert!(max_norm(&(s.a - a)) < 1e-12 * max_norm(&s.a).max(1.0));
    }
}

/// `Q` of `exp(−r²/2s²)` is `s√(2π) e^{−z} I₀(z)` with `z = r²/4s²`.
fn q_gaussian(r: f64, s: f64) -> f64 {
    let z = r * r / (4.0 * s * s);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        term *= (z / 2.0).powi(2) / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    s * (2.0 * PI).sqrt() * (-z).exp() * sum
}

#[test]
fn q_on_gaussian_matches_spectral_and_closed_form() {
    let n = 256;
    let grid = Arc::new(PlaneGrid::square(8.0, n).unwrap());
    let phi = PlaneGridFunction::from_fn(grid.clone(), Support::FullPlane, |x1, x3| {
        [(-(x1 * x1 + x3 * x3) / 2.0).exp(), 0.0, 0.0]
    })
    .unwrap();
    let product = apply_q(&phi).values[0].clone();
    let spectral = apply_q_spectral(&grid, &phi.values[0]);
    let exact: Vec<f64> = (0..grid.len())
        .map(|p| q_gaussian(grid.x1(p % n).hypot(grid.x3(p / n)), 1.0))
        .collect();
    let peak = exact.iter().fold(0.0f64, |m, v| m.max(*v));
    let err = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / peak;
    println!("product {:.3e} spectral {:.3e} cross {:.3e}", err(&product, &exact), err(&spectral, &exact), err(&product, &spectral));
    assert!(err(&product, &spectral) < 1e-3);
    assert!(err(&spectral, &exact) < 1e-3);
    assert!(err(&product, &exact) < 1e-3);
}

#[test]
fn zero_fields_give_zero() {
    let grid = Arc::new(PlaneGrid::square(4.0, 32).unwrap());
    let z = PlaneGridFunction::zeros(grid.clone(), Support::CrackFaces);
    assert_eq!(apply_q(&z).max_abs(), 0.0);
    assert_eq!(apply_qj(&z, 1).unwrap().max_abs(), 0.0);
    assert_eq!(apply_qj(&z, 3).unwrap().max_abs(), 0.0);
    assert!(apply_qj(&z, 2).is_err());
    let r = forward_identity_3d(&z, &z, &z, &example_material()).unwrap();
    assert_eq!(r.crack.max_abs(), 0.0);
    assert_eq!(r.traction_ahead.max_abs(), 0.0);
    let t = fourier_table_check_on(grid.clone(), &vec![0.0; grid.len()]).unwrap();
    assert!(t.rows.iter().all(|r| r.discrepancy == 0.0));
}

#[test]
fn source_support_is_enforced() {
    let grid = Arc::new(PlaneGrid::square(4.0, 32).unwrap());
    let bad = PlaneGridFunction::from_fn(grid.clone(), Support::CrackFaces, |x1, _| [0.0, x1.max(0.0), 0.0]);
    assert!(bad.is_err());
    let full = PlaneGridFunction::from_fn(grid.clone(), Support::FullPlane, |_, _| [1.0, 0.0, 0.0]).unwrap();
    let z = PlaneGridFunction::zeros(grid, Support::CrackFaces);
    assert!(forward_identity_3d(&full, &z, &z, &example_material()).is_err());
}

#[test]
fn plane_theorems_hold_and_converge() {
    let reports: Vec<TheoremReport> = [64, 128, 256].iter().map(|&n| verify_theorems(n).unwrap()).collect();
    for r in &reports {
        for c in &r.cases {
            println!("{:4} {:40} {:.3e}", r.n, c.name, c.error);
        }
    }
    let fine = &reports[2];
    assert!(fine.max() < 1e-2, "{fine:?}");
    for c in &fine.cases {
        let coarse = reports[1].get(&c.name).unwrap();
        assert!(c.error <= coarse || c.error < 1e-6, "{}: {} then {}", c.name, coarse, c.error);
    }
}

#[test]
fn embedded_two_dimensional_solutions_satisfy_3d_identities() {
    for mat in [example_material(), d0_material()] {
        let coarse = verify_reduction(&mat, 128).unwrap();
        let fine = verify_reduction(&mat, 256).unwrap();
        println!("{coarse:?}\n{fine:?}");
        assert!(fine.max() < 1e-2, "{fine:?}");
        assert!(fine.max() < coarse.max());
    }
}

fn random_source(grid: &Arc<PlaneGrid>, seed: &[f64]) -> PlaneGridFunction {
    let neg = grid.negative_columns();
    let mut f = PlaneGridFunction::zeros(grid.clone(), Support::CrackFaces);
    let mut it = seed.iter().cycle();
    for c in 0..3 {
        for k in 0..grid.n3() {
            for i in 0..neg {
                f.values[c][grid.index(i, k)] = *it.next().unwrap();
            }
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn homogeneous_forms_agree(
        mu in 0.1f64..10.0,
        nu in -0.9f64..0.49,
        seed in proptest::collection::vec(-1.0f64..1.0, 97),
    ) {
        let grid = Arc::new(PlaneGrid::square(3.0, 24).unwrap());
        let plan = ConvolutionPlan::new(grid.clone());
        let u = random_source(&grid, &seed);
        let j = random_source(&grid, &seed[3..]);
        let general = assemble_operators_3d(&homogeneous(mu, nu));
        let reduced = HomogeneousOperators3d { shear_modulus: mu, poisson_ratio: nu };
        for (x, y) in [
            (general.apply_a(&plan, &j).unwrap(), reduced.apply_a(&plan, &j).unwrap()),
            (general.apply_b(&plan, &u).unwrap(), reduced.apply_b(&plan, &u).unwrap()),
        ] {
            let scale = x.max_abs().max(1e-300);
            for c in 0..3 {
                for (a, b) in x.values[c].iter().zip(&y.values[c]) {
                    prop_assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn fourier_table_rows() {
    let coarse = fourier_table_check_n(128).unwrap();
    let fine = fourier_table_check().unwrap();
    for (c, f) in coarse.rows.iter().zip(&fine.rows) {
        println!("{:2} {:10} {:24} {:.3e} {:.3e}", f.row, f.symbol, f.kernel, c.discrepancy, f.discrepancy);
    }
    println!("1/rho at (1,0): {} vs {}", fine.inverse_one_over_rho, 1.0 / (2.0 * PI));
    assert_eq!(fine.rows.len(), 10);
    assert!(fine.max() < 1e-2, "{fine:?}");
    for (c, f) in coarse.rows.iter().zip(&fine.rows) {
        assert!(f.discrepancy < c.discrepancy, "row {}", f.row);
    }
    assert!((fine.inverse_one_over_rho * 2.0 * PI - 1.0).abs() < 5e-3);
}

/// Full-plane operators against their symbols under the discrete transform.
#[test]
fn operators_match_their_symbols() {
    let mat = example_material();
    let ops = assemble_operators_3d(&mat);
    let mut errs = Vec::new();
    for n in [128, 256] {
        // sources on x₁ < 0 so the operators accept them; the bump sits well
        // inside the crack half
        let grid = Arc::new(PlaneGrid::new((-16.0, 0.0), 8.0, n, n).unwrap());
        let plan = ConvolutionPlan::new(grid.clone());
        let f = PlaneGridFunction::from_fn(grid.clone(), Support::CrackFaces, |x1, x3| {
            let b = bump((x1 + 8.0).hypot(x3), 5.0);
            [0.6 * b, -1.1 * b, 0.9 * b]
        })
        .unwrap();
        let spatial_a = ops.apply_a(&plan, &f).unwrap();
        let spatial_b = ops.apply_b(&plan, &f).unwrap();
        let mut worst = 0.0f64;
        for (spatial, pick) in [(&spatial_a, 0usize), (&spatial_b, 1usize)] {
            // symbol applied column by column: out_r = Σ_c S_rc f̄_c
            let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    let zero = if pick == 0 {
                        // angular mean of A at the origin
                        let m = 64;
                        (0..m)
                            .map(|t| {
                                let th = 2.0 * PI * (t as f64 + 0.5) / m as f64;
                                assemble_symbols(&mat, th.cos(), th.sin()).unwrap().a[(r, c)]
                            })
                            .sum::<Complex64>()
                            / m as f64
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    let col = apply_symbol(
                        &grid,
                        &f.values[c],
                        SPECTRAL_PAD,
                        |b, l| {
                            let s = assemble_symbols(&mat, b, l).unwrap();
                            if pick == 0 { s.a[(r, c)] } else { s.b[(r, c)] }
                        },
                        zero,
                    );
                    for (o, v) in out[r].iter_mut().zip(col) {
                        *o += v;
                    }
                }
            }
            let scale = spatial.max_abs();
            for r in 0..3 {
                for (o, s) in out[r].iter().zip(&spatial.values[r]) {
                    worst = worst.max((o - Complex64::new(*s, 0.0)).norm() / scale);
                }
            }
        }
        println!("{n}: {worst:.3e}");
        errs.push(worst);
    }
    assert!(errs[1] < 1e-2 && errs[1] < errs[0], "{errs:?}");
}
