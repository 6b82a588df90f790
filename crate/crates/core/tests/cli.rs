use std::fs;
use std::path::Path;
use std::process::Command;

use crackops::analytic;
use crackops::cli::*;

const MATERIALS: &str = r#"
[materials.upper]
shear_modulus = 1.0
poisson_ratio = 0.3

[materials.lower]
shear_modulus = 2.0
poisson_ratio = 0.2
"#;

fn mode3_text(prefix: &Path, a: f64, symmetry: &str) -> String {
    format!(
        "mode = \"mode3\"\n{MATERIALS}\n[load.point]\nposition = {a}\nf3 = 1.0\nsymmetry = \"{symmetry}\"\n\n[output]\nprefix = \"{}\"\n",
        prefix.display()
    )
}

fn read_sif(path: &Path, label: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find(|l| l.starts_with(&format!("{label},")))
        .unwrap()
        .split(',')
        .map(String::from)
        .collect()
}

#[test]
fn minimal_config_gets_defaults() {
    let c = parse_config(&mode3_text(Path::new("x"), 2.0, "symmetric")).unwrap();
    assert_eq!(c.mode, Mode::Mode3);
    assert_eq!(c.mesh.n, 1024);
    assert_eq!(c.mesh.truncation_radius, 100.0);
    assert!(c.mesh.grading_ratio.is_none());
    assert_eq!(c.load.point_forces.len(), 1);
}

#[test]
fn out_of_range_poisson_ratio_is_named() {
    let text = mode3_text(Path::new("x"), 1.0, "symmetric").replace("0.3", "0.6");
    let e = parse_config(&text).unwrap_err();
    assert!(e.mentions("materials.upper.poisson_ratio"), "{e}");
}

#[test]
fn in_plane_component_in_mode3_is_a_mismatch() {
    let text = mode3_text(Path::new("x"), 1.0, "symmetric").replace("f3 = 1.0", "f1 = 1.0\nf3 = 1.0");
    let e = parse_config(&text).unwrap_err();
    assert!(e.mentions("load.point.f1"));
    assert!(e.to_string().contains("component/mode mismatch"));
}

#[test]
fn all_errors_are_reported() {
    let text = mode3_text(Path::new("x"), -1.0, "sideways")
        .replace("2.0", "-2.0")
        .replace("[output]", "[mesh]\nn = 8\ncolour = 1\n\n[output]");
    let e = parse_config(&text).unwrap_err();
    for f in [
        "load.point.position",
        "load.point.symmetry",
        "materials.lower.shear_modulus",
        "mesh.colour",
    ] {
        assert!(e.mentions(f), "missing {f} in\n{e}");
    }
}

#[test]
fn syntax_error_carries_line_number() {
    let e = parse_config("mode = \"mode3\"\n\n[mesh\nn = 3\n").unwrap_err();
    assert_eq!(e.0.len(), 1);
    assert_eq!(e.0[0].line, Some(3), "{e}");
}

#[test]
fn unknown_mode_and_top_level_keys() {
    let e = parse_config("mode = \"mode4\"\nspeed = 3\n").unwrap_err();
    assert!(e.mentions("mode") && e.mentions("speed"), "{e}");
}

#[test]
fn overrides_are_validated() {
    let mut c = parse_config(&mode3_text(Path::new("x"), 1.0, "symmetric")).unwrap();
    assert!(c.apply_overrides(Some(8), None, None).unwrap_err().mentions("mesh.n"));
    let mut c2 = c.clone();
    assert!(c2.apply_overrides(Some(512), Some(0.5), None).unwrap_err().mentions("mesh.L"));
    c.apply_overrides(Some(512), Some(80.0), None).unwrap();
    assert_eq!((c.mesh.n, c.mesh.truncation_radius), (512, 80.0));
}

#[test]
fn general_plane_scenario_uses_fredholm_truncation() {
    let text = format!("mode = \"plane\"\n{MATERIALS}\n[load.point]\nposition = 2.0\nf1 = 1.0\nf2 = 1.0\n");
    let c = parse_config(&text).unwrap();
    assert!(c.constants().unwrap().d != 0.0);
    assert_eq!(c.mesh.truncation_radius, 2.0e6);
}

#[test]
fn mode3_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    for (a, sym) in [(1.0, "symmetric"), (0.5, "skew")] {
        let prefix = dir.path().join(format!("run_{sym}"));
        let c = parse_config(&mode3_text(&prefix, a, sym)).unwrap();
        let summary = run_scenario(&c).unwrap();
        assert_eq!(summary.files.len(), 4);
        let row = read_sif(&dir.path().join(format!("run_{sym}_sif.csv")), "K_III");
        let k: f64 = row[1].parse().unwrap();
        let mat = c.constants().unwrap();
        let expected = match sym {
            "symmetric" => analytic::mode3_symmetric_sif(a, 1.0),
            _ => analytic::mode3_skew_sif(&mat, a, 1.0),
        };
        assert!((k - expected).abs() < 1e-2 * expected, "{k} vs {expected}");
        // 17 significant digits
        assert_eq!(row[1].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);

        let opening = fs::read_to_string(dir.path().join(format!("run_{sym}_opening.csv"))).unwrap();
        assert!(opening.starts_with("x1,u_jump\n"));
        assert_eq!(opening.lines().count(), c.mesh.n + 1);
        let traction = fs::read_to_string(dir.path().join(format!("run_{sym}_traction.csv"))).unwrap();
        assert!(traction.starts_with("x1,sigma\n"));
        let plot = fs::read_to_string(dir.path().join(format!("run_{sym}_plot.gp"))).unwrap();
        assert!(plot.contains(&format!("run_{sym}_opening.csv")));
        assert!(plot.contains(&format!("run_{sym}_traction.csv")));
    }
}

#[test]
fn plane_run_writes_component_columns() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("plane");
    let text = format!(
        "mode = \"plane\"\n[materials.upper]\nshear_modulus = 1.0\npoisson_ratio = 0.25\n[materials.lower]\nshear_modulus = 2.0\npoisson_ratio = 0.0\n[load.point]\nposition = 1.0\nf1 = 0.7\nf2 = 1.3\n[output]\nprefix = \"{}\"\n",
        prefix.display()
    );
    let c = parse_config(&text).unwrap();
    run_scenario(&c).unwrap();
    let o = fs::read_to_string(dir.path().join("plane_opening.csv")).unwrap();
    assert!(o.starts_with("x1,u1_jump,u2_jump\n"));
    let t = fs::read_to_string(dir.path().join("plane_traction.csv")).unwrap();
    assert!(t.starts_with("x1,s21,s22\n"));
    let (ki, kii) = analytic::mode12_symmetric_sif(1.0, [0.7, 1.3]);
    let k: f64 = read_sif(&dir.path().join("plane_sif.csv"), "K_I")[1].parse().unwrap();
    let k2: f64 = read_sif(&dir.path().join("plane_sif.csv"), "K_II")[1].parse().unwrap();
    assert!((k - ki).abs() < 1e-2 * ki && (k2 - kii).abs() < 1e-2 * kii);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let prefix = dir.path().join(run);
        let c = parse_config(&mode3_text(&prefix, 1.0, "skew")).unwrap();
        run_scenario(&c).unwrap();
        bytes.push(
            ["_opening.csv", "_traction.csv", "_sif.csv"]
                .map(|s| fs::read(dir.path().join(format!("{run}{s}"))).unwrap()),
        );
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn convergence_is_monotone_and_deduplicated() {
    let c = parse_config(&mode3_text(Path::new("x"), 1.0, "symmetric")).unwrap();
    let r = convergence_study(&c, &[1024, 256, 512, 2048, 512]).unwrap();
    assert_eq!(r.warnings.len(), 1);
    let ns: Vec<usize> = r.rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, [256, 512, 1024, 2048]);
    for w in r.rows.windows(2) {
        assert!(w[1].opening_error < w[0].opening_error, "{:?}", r.rows);
        assert!(w[1].sif_error < w[0].sif_error, "{:?}", r.rows);
    }
    assert!(r.observed_order.unwrap() > 1.0);
    assert!(r.to_csv().starts_with("n,sif_error,opening_error,order\n"));
}

#[test]
fn convergence_needs_closed_form() {
    let text = format!("mode = \"plane\"\n{MATERIALS}\n[load.point]\nposition = 1.0\nf2 = 1.0\n");
    let c = parse_config(&text).unwrap();
    let e = convergence_study(&c, &[256, 512]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("requires analytic case"));
}

#[test]
fn table_check_reports_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("t");
    let c = parse_config(&format!("mode = \"table-check\"\n[output]\nprefix = \"{}\"\n", prefix.display())).unwrap();
    assert_eq!(c.mesh.n, 256);
    run_scenario(&c).unwrap();
    let report = fs::read_to_string(dir.path().join("t_table.csv")).unwrap();
    assert_eq!(report.lines().count(), 11);
    assert_eq!(report.matches(",PASS").count(), 10, "{report}");
}

#[test]
fn verify3d_report_lists_identities_and_reductions() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("v");
    let text = format!("mode = \"verify3d\"\n{MATERIALS}\n[output]\nprefix = \"{}\"\n", prefix.display());
    run_scenario(&parse_config(&text).unwrap()).unwrap();
    let report = fs::read_to_string(dir.path().join("v_verify3d.csv")).unwrap();
    assert!(report.contains("Q d11 = -2 S d1"));
    assert!(report.contains("Q1 d1 + Q3 d3 = 2"));
    assert!(report.contains("reduction: in-plane, crack"));
    assert!(!report.contains("FAIL"), "{report}");
}

fn crackops() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crackops"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, mode3_text(&dir.path().join("out"), 1.0, "symmetric")).unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, mode3_text(&dir.path().join("out"), 1.0, "symmetric").replace("0.3", "0.6")).unwrap();

    let ok = crackops().args(["solve", "--threads", "1", "--n", "512", "--config"]).arg(&good).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("out_sif.csv").exists());

    let cfg = crackops().args(["solve", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(cfg.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&cfg.stderr).contains("materials.upper.poisson_ratio"));

    let io = crackops()
        .args(["solve", "--config"])
        .arg(&good)
        .arg("--output")
        .arg(good.join("not_a_dir"))
        .output()
        .unwrap();
    assert_eq!(io.status.code(), Some(4));

    let env = crackops()
        .env("CRACKOPS_THREADS", "many")
        .args(["solve", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));

    let conv = crackops()
        .args(["converge", "--n", "256,512,256", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(conv.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&conv.stderr).contains("duplicate"));
    assert!(String::from_utf8_lossy(&conv.stdout).contains("observed order"));
}
