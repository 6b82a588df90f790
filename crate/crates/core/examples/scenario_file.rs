//! Runs a scenario from config text and lists the files written.

use crackops::cli::{parse_config, run_scenario};

fn main() {
    let dir = std::env::temp_dir().join("crackops-example");
    let text = format!(
        r#"
mode = "mode3"

[materials.upper]
shear_modulus = 1.0
poisson_ratio = 0.3

[materials.lower]
shear_modulus = 2.0
poisson_ratio = 0.2

[load.point]
position = 1.0
f3 = 1.0
symmetry = "skew"

[output]
prefix = "{}"
"#,
        dir.join("skew").display()
    );
    let config = parse_config(&text).unwrap_or_else(|e| panic!("{e}"));
    let summary = run_scenario(&config).unwrap_or_else(|e| panic!("{e}"));
    for (label, v) in &summary.values {
        println!("{label} = {v:.10}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
}
