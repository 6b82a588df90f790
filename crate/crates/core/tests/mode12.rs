use crackops::analytic;
use crackops::bimaterial::{compute_constants, BimaterialConstants, ElasticHalfSpace};
use crackops::load::{LoadSpec, Symmetry};
use crackops::mesh::SemiAxisMesh;
use crackops::mode12::*;

fn d0_material() -> BimaterialConstants {
    compute_constants(
        &ElasticHalfSpace::new(1.0, 0.25).unwrap(),
        &ElasticHalfSpace::new(2.0, 0.0).unwrap(),
    )
    .unwrap()
}

fn example_material() -> BimaterialConstants {
    compute_constants(
        &ElasticHalfSpace::new(1.0, 0.3).unwrap(),
        &ElasticHalfSpace::new(2.0, 0.2).unwrap(),
    )
    .unwrap()
}

/// Max relative deviation on `[lo, hi]`, away from the load point.
fn max_rel(m: &SemiAxisMesh, v: &[f64], f: impl Fn(f64) -> f64, lo: f64, hi: f64, skip: f64) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in m.nodes().iter().zip(v) {
        if *x >= lo && *x <= hi && (x - skip).abs() > 1e-2 * skip.abs() {
            let e = f(*x);
            worst = worst.max((y - e).abs() / e.abs().max(1e-300));
        }
    }
    worst
}

const F: [f64; 2] = [0.7, 1.3];

fn closed_opening(mat: &BimaterialConstants, sym: Symmetry, a: f64, c: usize, x: f64) -> f64 {
    match sym {
        Symmetry::Symmetric => analytic::mode12_symmetric_opening(mat, a, F, x)[c],
        Symmetry::Skew => analytic::mode12_skew_opening(mat, a, F, x)[c],
    }
}

fn closed_traction(mat: &BimaterialConstants, sym: Symmetry, a: f64, c: usize, x: f64) -> f64 {
    match sym {
        Symmetry::Symmetric => analytic::mode12_symmetric_traction(a, F, x)[c],
        Symmetry::Skew => analytic::mode12_skew_traction(mat, a, F, x)[c],
    }
}

#[test]
fn decoupled_path_matches_closed_forms() {
    let mat = d0_material();
    for a in [0.5, 2.0] {
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            let load = LoadSpec::point(a, [F[0], F[1], 0.0], sym);
            let (m, ahead) = load.solver_meshes(2048).unwrap();
            let s = solve_decoupled_d0(&load, &mat, &m, &ahead).unwrap();
            let (ki, kii) = match sym {
                Symmetry::Symmetric => analytic::mode12_symmetric_sif(a, F),
                Symmetry::Skew => analytic::mode12_skew_sif(&mat, a, F),
            };
            assert!((s.k_i - ki).abs() < 1e-6 * ki, "{sym:?} K_I {} vs {ki}", s.k_i);
            assert!((s.k_ii - kii).abs() < 1e-6 * kii, "{sym:?} K_II {} vs {kii}", s.k_ii);
            for c in 0..2 {
                let e = max_rel(&m, &s.opening[c].values, |x| closed_opening(&mat, sym, a, c, x), -10.0 * a, -0.01 * a, -a);
                assert!(e < 1e-6, "{sym:?} opening {c}: {e}");
                let t = max_rel(&ahead, &s.traction_ahead[c].values, |x| closed_traction(&mat, sym, a, c, x), 0.01 * a, 10.0 * a, -a);
                assert!(t < 1e-3, "{sym:?} traction {c}: {t}");
            }
            let r = coupled_residual(&s.opening_derivative, &load, &mat, 2).unwrap();
            assert!(r.max() < 1e-4, "{r:?}");
            let jumps = opening_jumps(&s, -a);
            let expected = match sym {
                Symmetry::Symmetric => [0.0, 0.0],
                Symmetry::Skew => analytic::flamant_jump_constants(&mat, F),
            };
            for c in 0..2 {
                assert!((jumps[c] - expected[c]).abs() < 1e-12, "{sym:?} jump {c}: {jumps:?}");
            }
        }
    }
}

#[test]
fn fredholm_path_agrees_with_decoupled() {
    let mat = d0_material();
    let a = 1.0;
    for sym in [Symmetry::Symmetric, Symmetry::Skew] {
        let load = LoadSpec::point(a, [F[0], F[1], 0.0], sym);
        let (m, ahead) = load
            .solver_meshes_with(2048, FREDHOLM_FAR_FACTOR, FREDHOLM_TIP_FRACTION)
            .unwrap();
        let dec = solve_decoupled_d0(&load, &mat, &m, &ahead).unwrap();
        let gen = solve_general(&load, &mat, &m, &ahead).unwrap();
        assert!((gen.k_i - dec.k_i).abs() < 1e-3 * dec.k_i.abs());
        assert!((gen.k_ii - dec.k_ii).abs() < 1e-3 * dec.k_ii.abs());
        for c in 0..2 {
            let e = max_rel(&m, &gen.opening[c].values, |x| closed_opening(&mat, sym, a, c, x), -100.0 * a, -1e-4 * a, -a);
            assert!(e < 1e-3, "{sym:?} opening {c}: {e}");
        }
        let r = coupled_residual(&gen.opening_derivative, &load, &mat, 2).unwrap();
        assert!(r.max() < 1e-3, "{r:?}");
        assert!(gen.condition_estimate.unwrap() < CONDITION_LIMIT);
    }
}

#[test]
fn example_material_residual() {
    let mat = example_material();
    assert!(mat.d > 0.0);
    let load = LoadSpec::point(1.0, [F[0], F[1], 0.0], Symmetry::Symmetric);
    let (m, ahead) = load
        .solver_meshes_with(2048, FREDHOLM_FAR_FACTOR, FREDHOLM_TIP_FRACTION)
        .unwrap();
    let s = solve_general(&load, &mat, &m, &ahead).unwrap();
    let r = coupled_residual(&s.opening_derivative, &load, &mat, 2).unwrap();
    assert!(r.max() < 1e-3, "{r:?}");
    assert!(s.k_i.is_finite() && s.k_ii.is_finite());
    // small mismatch: close to the homogeneous factors
    let (ki, kii) = analytic::mode12_symmetric_sif(1.0, F);
    assert!((s.k_i - ki).abs() < 0.05 * ki && (s.k_ii - kii).abs() < 0.05 * kii);
}

#[test]
fn rejects_decoupled_path_for_mismatched_material() {
    let mat = example_material();
    let load = LoadSpec::point(1.0, [F[0], F[1], 0.0], Symmetry::Symmetric);
    let (m, ahead) = load.solver_meshes(256).unwrap();
    assert!(solve_decoupled_d0(&load, &mat, &m, &ahead).is_err());
    let bad = LoadSpec::point(1.0, [0.0, 0.0, 1.0], Symmetry::Symmetric);
    assert!(solve_general(&bad, &mat, &m, &ahead).is_err());
}

#[test]
fn plane_operator_constants() {
    let c = ConstantMatrices2::new();
    assert_eq!(c.identity_defect(), 0.0);
    let mat = example_material();
    let spec = assemble_plane_operators(&mat);
    assert!(!spec.a_s.is_empty() && !spec.b_s.is_empty());
    assert!(oscillation_index(&mat) > 0.0);
    assert_eq!(oscillation_index(&d0_material()), 0.0);
}
