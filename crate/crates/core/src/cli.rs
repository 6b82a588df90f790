//! Scenario files, solver runs and the artifacts they produce.
//!
//! A scenario is a TOML document with a top-level `mode` key and the flat
//! sections `[materials.upper]`, `[materials.lower]`, `[load.point]`,
//! `[mesh]` and `[output]`:
//!
//! ```toml
//! mode = "mode3"
//!
//! [materials.upper]
//! shear_modulus = 1.0
//! poisson_ratio = 0.3
//!
//! [materials.lower]
//! shear_modulus = 2.0
//! poisson_ratio = 0.2
//!
//! [load.point]
//! position = 1.0        # distance a behind the tip
//! f3 = 1.0              # f1, f2, f3 default to 0
//! symmetry = "skew"     # or "symmetric" (default)
//!
//! [mesh]
//! n = 1024
//!
//! [output]
//! prefix = "out/skew"
//! ```
//!
//! Several point forces may be given as `[[load.point]]` entries.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use toml::{Table, Value};

use crate::analytic;
use crate::bimaterial::{compute_constants, BimaterialConstants, ElasticHalfSpace};
use crate::elast3d;
use crate::error::CrackError;
use crate::load::{LoadSpec, PointForce, Symmetry};
use crate::mesh::{build_ahead_mesh, build_graded_mesh, ratio_for_tip_fraction, SemiAxisMesh};
use crate::mode12::{self, FREDHOLM_FAR_FACTOR, FREDHOLM_TIP_FRACTION};
use crate::mode3;
use crate::sif::SifEstimate;

pub const DEFAULT_N: usize = 1024;
/// Default grid size for the 3D modes.
pub const DEFAULT_GRID_N: usize = 256;
/// Default truncation radius in units of the farthest load distance.
pub const DEFAULT_FAR_FACTOR: f64 = 50.0;
/// Default tip gap as a fraction of `L`.
pub const DEFAULT_TIP_FRACTION: f64 = 1e-10;
pub const DEFAULT_PREFIX: &str = "crackops";
/// Tolerance for the 3D identity and table checks.
pub const CHECK_TOL: f64 = 1e-2;

const MIN_N: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mode3,
    Plane,
    Verify3d,
    TableCheck,
}

impl Mode {
    fn parse(s: &str) -> Option<Mode> {
        match s {
            "mode3" => Some(Mode::Mode3),
            "plane" => Some(Mode::Plane),
            "verify3d" => Some(Mode::Verify3d),
            "table-check" => Some(Mode::TableCheck),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Mode3 => "mode3",
            Mode::Plane => "plane",
            Mode::Verify3d => "verify3d",
            Mode::TableCheck => "table-check",
        }
    }

    fn is_3d(self) -> bool {
        matches!(self, Mode::Verify3d | Mode::TableCheck)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    /// Node count per semi-axis, or grid size per direction in the 3D modes.
    pub n: usize,
    /// Truncation radius `L`.
    pub truncation_radius: f64,
    /// Explicit grading ratio; otherwise derived from `tip_fraction`.
    pub grading_ratio: Option<f64>,
    pub tip_fraction: f64,
}

impl MeshConfig {
    pub fn ratio(&self) -> f64 {
        self.grading_ratio
            .unwrap_or_else(|| ratio_for_tip_fraction(self.n, self.tip_fraction))
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub mode: Mode,
    /// Upper (`x₂ > 0`) and lower half-spaces.
    pub materials: Option<(ElasticHalfSpace, ElasticHalfSpace)>,
    pub load: LoadSpec,
    pub mesh: MeshConfig,
    pub output: PathBuf,
}

impl ScenarioConfig {
    pub fn constants(&self) -> Option<BimaterialConstants> {
        self.materials
            .as_ref()
            .and_then(|(u, l)| compute_constants(u, l).ok())
    }

    /// Applies command-line overrides and re-validates the mesh.
    pub fn apply_overrides(
        &mut self,
        n: Option<usize>,
        truncation_radius: Option<f64>,
        output: Option<PathBuf>,
    ) -> Result<(), ConfigErrors> {
        let mut issues = Vec::new();
        if let Some(n) = n {
            self.mesh.n = n;
        }
        if let Some(l) = truncation_radius {
            self.mesh.truncation_radius = l;
        }
        if let Some(p) = output {
            self.output = p;
        }
        check_mesh(self.mode, &self.mesh, &self.load, &mut issues);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(issues))
        }
    }

    fn artifact(&self, suffix: &str) -> PathBuf {
        let mut s = self.output.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    }
}

/// One problem found in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// Line of a syntax error.
    pub line: Option<usize>,
    /// Dotted key path of a semantic error.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Every problem found in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    pub fn mentions(&self, field: &str) -> bool {
        self.0.iter().any(|i| i.field == field)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n{0}")]
    Config(ConfigErrors),
    #[error("solver error: {0}")]
    Solver(CrackError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Verification { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config(ConfigErrors(vec![issue(field, message)]))
    }
}

impl From<CrackError> for CliError {
    fn from(e: CrackError) -> Self {
        match e {
            CrackError::Validation { field, message } => CliError::config(&field, message),
            other => CliError::Solver(other),
        }
    }
}

impl From<ConfigErrors> for CliError {
    fn from(e: ConfigErrors) -> Self {
        CliError::Config(e)
    }
}

fn issue(field: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        line: None,
        field: field.to_string(),
        message: message.into(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Reads the keys of `table`, reporting any not in `allowed`.
fn check_keys(table: &Table, path: &str, allowed: &[&str], issues: &mut Vec<ConfigIssue>) {
    for k in table.keys() {
        if !allowed.contains(&k.as_str()) {
            let field = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            issues.push(issue(&field, "unknown key"));
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn get_number(table: &Table, path: &str, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<f64> {
    let v = table.get(key)?;
    let r = number(v);
    if r.is_none() {
        issues.push(issue(&format!("{path}.{key}"), "expected a number"));
    }
    r
}

fn sub_table<'a>(table: &'a Table, path: &str, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<&'a Table> {
    match table.get(key)? {
        Value::Table(t) => Some(t),
        _ => {
            let field = if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
            issues.push(issue(&field, "expected a section"));
            None
        }
    }
}

fn parse_material(t: &Table, path: &str, issues: &mut Vec<ConfigIssue>) -> Option<ElasticHalfSpace> {
    check_keys(t, path, &["shear_modulus", "poisson_ratio"], issues);
    let mu = get_number(t, path, "shear_modulus", issues);
    let nu = get_number(t, path, "poisson_ratio", issues);
    for (k, v) in [("shear_modulus", mu), ("poisson_ratio", nu)] {
        if v.is_none() && !t.contains_key(k) {
            issues.push(issue(&format!("{path}.{k}"), "missing"));
        }
    }
    let m = ElasticHalfSpace {
        shear_modulus: mu?,
        poisson_ratio: nu?,
    };
    let before = issues.len();
    // validate() stops at the first bad field; check both
    for probe in [
        ElasticHalfSpace { poisson_ratio: 0.0, ..m },
        ElasticHalfSpace { shear_modulus: 1.0, ..m },
    ] {
        if let Err(CrackError::Validation { field, message }) = probe.validate(&format!("{path}.")) {
            issues.push(issue(&field, message));
        }
    }
    (issues.len() == before).then_some(m)
}

fn parse_point(t: &Table, path: &str, issues: &mut Vec<ConfigIssue>) -> Option<PointForce> {
    check_keys(t, path, &["position", "f1", "f2", "f3", "symmetry"], issues);
    let before = issues.len();
    let distance = match get_number(t, path, "position", issues) {
        Some(a) if a.is_finite() && a > 0.0 => a,
        Some(a) => {
            issues.push(issue(
                &format!("{path}.position"),
                format!("must be a positive distance behind the tip, got {a}"),
            ));
            f64::NAN
        }
        None => {
            if !t.contains_key("position") {
                issues.push(issue(&format!("{path}.position"), "missing"));
            }
            f64::NAN
        }
    };
    let mut force = [0.0; 3];
    for (j, key) in ["f1", "f2", "f3"].iter().enumerate() {
        if let Some(f) = get_number(t, path, key, issues) {
            if f.is_finite() {
                force[j] = f;
            } else {
                issues.push(issue(&format!("{path}.{key}"), "must be finite"));
            }
        }
    }
    let symmetry = match t.get("symmetry") {
        None => Symmetry::Symmetric,
        Some(Value::String(s)) if s == "symmetric" => Symmetry::Symmetric,
        Some(Value::String(s)) if s == "skew" => Symmetry::Skew,
        Some(_) => {
            issues.push(issue(
                &format!("{path}.symmetry"),
                "expected \"symmetric\" or \"skew\"",
            ));
            Symmetry::Symmetric
        }
    };
    (issues.len() == before).then_some(PointForce {
        distance,
        force,
        symmetry,
    })
}

fn check_mesh(mode: Mode, mesh: &MeshConfig, load: &LoadSpec, issues: &mut Vec<ConfigIssue>) {
    if mode.is_3d() {
        if mesh.n < 16 || mesh.n % 2 != 0 {
            issues.push(issue("mesh.n", format!("grid size must be even and at least 16, got {}", mesh.n)));
        }
        return;
    }
    let needed = MIN_N.max(16 + 8 * load.positions().len());
    if mesh.n < needed {
        issues.push(issue("mesh.n", format!("must be at least {needed}, got {}", mesh.n)));
    }
    let l = mesh.truncation_radius;
    if !(l.is_finite() && l > 0.0) {
        issues.push(issue("mesh.L", format!("must be positive, got {l}")));
    } else if let Some(far) = load.farthest() {
        if l <= far {
            issues.push(issue(
                "mesh.L",
                format!("must exceed the farthest load distance {far}, got {l}"),
            ));
        }
    }
    if let Some(r) = mesh.grading_ratio {
        if !(r.is_finite() && r > 1.0) {
            issues.push(issue("mesh.grading_ratio", format!("must exceed 1, got {r}")));
        }
    }
}

/// Parses and validates a scenario, collecting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let root: Table = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
        ConfigErrors(vec![ConfigIssue {
            line: Some(line),
            field: String::new(),
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut issues = Vec::new();
    check_keys(&root, "", &["mode", "materials", "load", "mesh", "output"], &mut issues);

    let mode = match root.get("mode") {
        Some(Value::String(s)) => {
            let m = Mode::parse(s);
            if m.is_none() {
                issues.push(issue(
                    "mode",
                    format!("unknown mode `{s}` (expected mode3, plane, verify3d or table-check)"),
                ));
            }
            m
        }
        Some(_) => {
            issues.push(issue("mode", "expected a string"));
            None
        }
        None => {
            issues.push(issue("mode", "missing"));
            None
        }
    };

    let mut materials = None;
    if let Some(t) = sub_table(&root, "", "materials", &mut issues) {
        check_keys(t, "materials", &["upper", "lower"], &mut issues);
        let mut pick = |side: &str| {
            let path = format!("materials.{side}");
            match sub_table(t, "materials", side, &mut issues) {
                Some(m) => parse_material(m, &path, &mut issues),
                None => {
                    if !t.contains_key(side) {
                        issues.push(issue(&path, "missing"));
                    }
                    None
                }
            }
        };
        let upper = pick("upper");
        let lower = pick("lower");
        if let (Some(u), Some(l)) = (upper, lower) {
            materials = Some((u, l));
        }
    } else if !root.contains_key("materials") && !matches!(mode, Some(Mode::TableCheck)) {
        issues.push(issue("materials", "missing"));
    }

    let mut load = LoadSpec::default();
    let mut load_given = false;
    if let Some(t) = sub_table(&root, "", "load", &mut issues) {
        load_given = true;
        check_keys(t, "load", &["point"], &mut issues);
        match t.get("point") {
            Some(Value::Table(p)) => {
                if let Some(f) = parse_point(p, "load.point", &mut issues) {
                    load.point_forces.push(f);
                }
            }
            Some(Value::Array(list)) => {
                for (i, v) in list.iter().enumerate() {
                    let path = format!("load.point[{i}]");
                    match v {
                        Value::Table(p) => {
                            if let Some(f) = parse_point(p, &path, &mut issues) {
                                load.point_forces.push(f);
                            }
                        }
                        _ => issues.push(issue(&path, "expected a section")),
                    }
                }
            }
            Some(_) => issues.push(issue("load.point", "expected a section")),
            None => issues.push(issue("load.point", "missing")),
        }
    }

    let mut mesh_n = None;
    let mut mesh_l = None;
    let mut grading = None;
    if let Some(t) = sub_table(&root, "", "mesh", &mut issues) {
        check_keys(t, "mesh", &["n", "L", "grading_ratio"], &mut issues);
        match t.get("n") {
            Some(Value::Integer(n)) if *n > 0 => mesh_n = Some(*n as usize),
            Some(_) => issues.push(issue("mesh.n", "expected a positive integer")),
            None => {}
        }
        mesh_l = get_number(t, "mesh", "L", &mut issues);
        grading = get_number(t, "mesh", "grading_ratio", &mut issues);
    }

    let mut output = PathBuf::from(DEFAULT_PREFIX);
    if let Some(t) = sub_table(&root, "", "output", &mut issues) {
        check_keys(t, "output", &["prefix"], &mut issues);
        match t.get("prefix") {
            Some(Value::String(s)) if !s.is_empty() => output = PathBuf::from(s),
            Some(_) => issues.push(issue("output.prefix", "expected a non-empty string")),
            None => {}
        }
    }

    let Some(mode) = mode else {
        return Err(ConfigErrors(issues));
    };

    // consistency between mode, loads and materials
    if mode.is_3d() {
        if load_given {
            issues.push(issue("load", format!("not used by mode {}", mode.name())));
        }
        if mode == Mode::TableCheck && materials.is_some() {
            issues.push(issue("materials", "not used by mode table-check"));
        }
    } else {
        if !load_given {
            issues.push(issue("load.point", "missing"));
        }
        for (i, p) in load.point_forces.iter().enumerate() {
            let path = if load.point_forces.len() == 1 && matches!(root.get("load").and_then(|l| l.get("point")), Some(Value::Table(_))) {
                "load.point".to_string()
            } else {
                format!("load.point[{i}]")
            };
            let bad: &[(usize, &str)] = match mode {
                Mode::Mode3 => &[(0, "f1"), (1, "f2")],
                _ => &[(2, "f3")],
            };
            for &(j, key) in bad {
                if p.force[j] != 0.0 {
                    issues.push(issue(
                        &format!("{path}.{key}"),
                        format!(
                            "component/mode mismatch: mode {} does not accept {key}",
                            mode.name()
                        ),
                    ));
                }
            }
        }
    }

    let mut tip_fraction = DEFAULT_TIP_FRACTION;
    let mut far_factor = DEFAULT_FAR_FACTOR;
    if mode == Mode::Plane {
        let general = materials
            .as_ref()
            .and_then(|(u, l)| compute_constants(u, l).ok())
            .is_some_and(|c| c.d != 0.0);
        if general {
            tip_fraction = FREDHOLM_TIP_FRACTION;
            far_factor = FREDHOLM_FAR_FACTOR;
        }
    }
    let a = load.farthest().unwrap_or(1.0);
    let mesh = MeshConfig {
        n: mesh_n.unwrap_or(if mode.is_3d() { DEFAULT_GRID_N } else { DEFAULT_N }),
        truncation_radius: mesh_l.unwrap_or(far_factor * a),
        grading_ratio: grading,
        tip_fraction,
    };
    if mode.is_3d() && (mesh_l.is_some() || grading.is_some()) {
        let key = if mesh_l.is_some() { "mesh.L" } else { "mesh.grading_ratio" };
        issues.push(issue(key, format!("not used by mode {}", mode.name())));
    }
    if issues.is_empty() {
        check_mesh(mode, &mesh, &load, &mut issues);
    }
    if !issues.is_empty() {
        return Err(ConfigErrors(issues));
    }
    Ok(ScenarioConfig {
        mode,
        materials,
        load,
        mesh,
        output,
    })
}

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::config("config", format!("cannot read {}: {e}", path.display()))
    })?;
    Ok(parse_config(&text)?)
}

/// Formats with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.into_iter().map(fmt_num).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Closed-form solution for a single point force, where one exists.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    pub mode: Mode,
    pub distance: f64,
    pub force: [f64; 3],
    pub symmetry: Symmetry,
    pub mat: BimaterialConstants,
}

impl Oracle {
    pub fn for_config(config: &ScenarioConfig) -> Option<Oracle> {
        let mat = config.constants()?;
        let [p] = config.load.point_forces.as_slice() else {
            return None;
        };
        match config.mode {
            Mode::Mode3 => {}
            Mode::Plane if mat.d == 0.0 => {}
            _ => return None,
        }
        Some(Oracle {
            mode: config.mode,
            distance: p.distance,
            force: p.force,
            symmetry: p.symmetry,
            mat,
        })
    }

    /// Reference factors, labelled as in the SIF file.
    pub fn sif(&self) -> Vec<(&'static str, f64)> {
        let (a, f) = (self.distance, self.force);
        match (self.mode, self.symmetry) {
            (Mode::Mode3, Symmetry::Symmetric) => vec![("K_III", analytic::mode3_symmetric_sif(a, f[2]))],
            (Mode::Mode3, Symmetry::Skew) => vec![("K_III", analytic::mode3_skew_sif(&self.mat, a, f[2]))],
            (_, sym) => {
                let (ki, kii) = match sym {
                    Symmetry::Symmetric => analytic::mode12_symmetric_sif(a, [f[0], f[1]]),
                    Symmetry::Skew => analytic::mode12_skew_sif(&self.mat, a, [f[0], f[1]]),
                };
                vec![("K_I", ki), ("K_II", kii)]
            }
        }
    }

    /// Opening components at `x < 0`.
    pub fn opening(&self, x: f64) -> Vec<f64> {
        let (a, f) = (self.distance, self.force);
        match (self.mode, self.symmetry) {
            (Mode::Mode3, Symmetry::Symmetric) => vec![analytic::mode3_symmetric_opening(&self.mat, a, f[2], x)],
            (Mode::Mode3, Symmetry::Skew) => vec![analytic::mode3_skew_opening(&self.mat, a, f[2], x)],
            (_, Symmetry::Symmetric) => analytic::mode12_symmetric_opening(&self.mat, a, [f[0], f[1]], x).to_vec(),
            (_, Symmetry::Skew) => analytic::mode12_skew_opening(&self.mat, a, [f[0], f[1]], x).to_vec(),
        }
    }
}

/// A solved 1D scenario, reduced to what the artifacts need.
#[derive(Debug, Clone)]
pub struct SolvedScenario {
    pub crack: Arc<SemiAxisMesh>,
    pub ahead: Arc<SemiAxisMesh>,
    /// One opening per component (1 for Mode III, 2 in plane).
    pub opening: Vec<Vec<f64>>,
    pub traction: Vec<Vec<f64>>,
    /// `(label, estimate)` for each factor.
    pub sif: Vec<(&'static str, SifEstimate)>,
    /// Extra scalar diagnostics `(label, value)`.
    pub diagnostics: Vec<(&'static str, f64)>,
}

/// Runs the Mode III or plane solver described by `config`.
pub fn solve(config: &ScenarioConfig) -> Result<SolvedScenario, CliError> {
    let mat = config
        .constants()
        .ok_or_else(|| CliError::config("materials", "missing"))?;
    let m = &config.mesh;
    let ratio = m.ratio();
    let crack = Arc::new(build_graded_mesh(
        m.truncation_radius,
        m.n,
        ratio,
        &config.load.positions(),
    )?);
    let ahead = Arc::new(build_ahead_mesh(m.truncation_radius, m.n, ratio)?);
    match config.mode {
        Mode::Mode3 => {
            let s = mode3::solve_mode3(&config.load, &mat, &crack, &ahead)?;
            let mut diagnostics = Vec::new();
            if let Some(k) = s.k_iii_from_k0 {
                diagnostics.push(("K_III_from_K0", k));
            }
            Ok(SolvedScenario {
                crack,
                ahead,
                opening: vec![s.opening.values],
                traction: vec![s.traction_ahead.values],
                sif: vec![("K_III", s.sif)],
                diagnostics,
            })
        }
        Mode::Plane => {
            let s = if mat.d == 0.0 {
                mode12::solve_decoupled_d0(&config.load, &mat, &crack, &ahead)?
            } else {
                mode12::solve_general(&config.load, &mat, &crack, &ahead)?
            };
            let mut diagnostics = vec![
                ("epsilon", mode12::oscillation_index(&mat)),
                (
                    "coupled_residual",
                    mode12::coupled_residual(&s.opening_derivative, &config.load, &mat, 2)?.max(),
                ),
            ];
            if let Some(c) = s.condition_estimate {
                diagnostics.push(("condition_estimate", c));
            }
            let [o1, o2] = s.opening;
            let [t1, t2] = s.traction_ahead;
            Ok(SolvedScenario {
                crack,
                ahead,
                opening: vec![o1.values, o2.values],
                traction: vec![t1.values, t2.values],
                sif: vec![("K_I", s.sif.k_i), ("K_II", s.sif.k_ii)],
                diagnostics,
            })
        }
        _ => Err(CliError::config("mode", "not a solver mode")),
    }
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Headline numbers, `(label, value)`.
    pub values: Vec<(String, f64)>,
}

/// Solves or verifies the scenario and writes its artifacts.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    match config.mode {
        Mode::Mode3 | Mode::Plane => run_solver(config),
        Mode::Verify3d => run_verify3d(config),
        Mode::TableCheck => run_table_check(config),
    }
}

fn run_solver(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let s = solve(config)?;
    let plane = config.mode == Mode::Plane;
    let mut out = RunSummary::default();

    let (oh, th): (&[&str], &[&str]) = if plane {
        (&["x1", "u1_jump", "u2_jump"], &["x1", "s21", "s22"])
    } else {
        (&["x1", "u_jump"], &["x1", "sigma"])
    };
    let columns = |mesh: &SemiAxisMesh, cols: &[Vec<f64>]| {
        let x = mesh.nodes().to_vec();
        let cols = cols.to_vec();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap());
        idx.into_iter()
            .map(move |i| std::iter::once(x[i]).chain(cols.iter().map(|c| c[i])).collect())
            .collect::<Vec<Vec<f64>>>()
    };
    let opening_path = config.artifact("_opening.csv");
    write_file(&opening_path, &csv(oh, columns(&s.crack, &s.opening).into_iter()))?;
    let traction_path = config.artifact("_traction.csv");
    write_file(&traction_path, &csv(th, columns(&s.ahead, &s.traction).into_iter()))?;

    let oracle = Oracle::for_config(config);
    let reference = oracle.map(|o| o.sif()).unwrap_or_default();
    let mut sif = String::from("label,value,companion,spread,samples,reference,relative_error\n");
    for (label, est) in &s.sif {
        let r = reference.iter().find(|(l, _)| l == label).map(|(_, v)| *v);
        let (rs, es) = match r {
            Some(r) => (fmt_num(r), fmt_num((est.value - r).abs() / r.abs().max(f64::MIN_POSITIVE))),
            None => (String::new(), String::new()),
        };
        sif.push_str(&format!(
            "{label},{},{},{},{},{rs},{es}\n",
            fmt_num(est.value),
            fmt_num(est.companion),
            fmt_num(est.spread()),
            est.samples
        ));
        out.values.push((label.to_string(), est.value));
    }
    for (label, v) in &s.diagnostics {
        sif.push_str(&format!("{label},{},,,,,\n", fmt_num(*v)));
    }
    let sif_path = config.artifact("_sif.csv");
    write_file(&sif_path, &sif)?;

    let plot_path = config.artifact("_plot.gp");
    write_file(&plot_path, &plot_script(config, &opening_path, &traction_path, plane))?;
    out.files = vec![opening_path, traction_path, sif_path, plot_path];
    Ok(out)
}

fn plot_script(config: &ScenarioConfig, opening: &Path, traction: &Path, plane: bool) -> String {
    let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name(&config.output);
    let (o, t) = (name(opening), name(traction));
    let mut s = String::new();
    s.push_str("# run from the directory holding the CSV files\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{stem}_opening.png'\n"));
    s.push_str("set xlabel 'x1'\nset ylabel 'opening'\n");
    if plane {
        s.push_str(&format!("plot '{o}' using 1:2 with lines, '' using 1:3 with lines\n"));
    } else {
        s.push_str(&format!("plot '{o}' using 1:2 with lines\n"));
    }
    s.push_str(&format!("set output '{stem}_traction.png'\n"));
    s.push_str("set logscale xy\nset ylabel '|traction|'\n");
    if plane {
        s.push_str(&format!(
            "plot '{t}' using 1:(abs($2)) with lines title 's21', '' using 1:(abs($3)) with lines title 's22'\n"
        ));
    } else {
        s.push_str(&format!("plot '{t}' using 1:(abs($2)) with lines title 'sigma'\n"));
    }
    s
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub n: usize,
    pub value: f64,
    pub tolerance: f64,
    /// Error on the half-size grid; the check then also requires refinement
    /// not to increase the error above roundoff.
    pub coarse: Option<f64>,
}

/// Errors below this are roundoff and exempt from the refinement test.
pub const ROUNDOFF_FLOOR: f64 = 1e-8;

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        let refined = self
            .coarse
            .is_none_or(|c| self.value <= c || self.value < ROUNDOFF_FLOOR);
        self.value.is_finite() && self.value < self.tolerance && refined
    }
}

fn report_csv(checks: &[CheckOutcome]) -> String {
    let mut s = String::from("check,n,error,coarse_error,tolerance,status\n");
    for c in checks {
        s.push_str(&format!(
            "\"{}\",{},{},{},{},{}\n",
            c.name,
            c.n,
            fmt_num(c.value),
            c.coarse.map(fmt_num).unwrap_or_default(),
            fmt_num(c.tolerance),
            if c.passed() { "PASS" } else { "FAIL" }
        ));
    }
    s
}

fn named_3d(mat: &BimaterialConstants, n: usize) -> Result<Vec<(String, f64)>, CliError> {
    let mut out: Vec<(String, f64)> = elast3d::verify_theorems(n)?
        .cases
        .into_iter()
        .map(|c| (c.name, c.error))
        .collect();
    let r = elast3d::verify_reduction(mat, n)?;
    for (name, v) in [
        ("reduction: antiplane, crack", r.mode3_crack),
        ("reduction: in-plane, crack", r.plane_crack),
        ("reduction: antiplane, ahead", r.mode3_ahead),
        ("reduction: in-plane, ahead", r.plane_ahead),
    ] {
        out.push((name.into(), v));
    }
    Ok(out)
}

/// Identity and reduction checks at `n`, with `n/2` as the refinement
/// reference.
pub fn checks_3d(mat: &BimaterialConstants, n: usize) -> Result<Vec<CheckOutcome>, CliError> {
    let coarse = named_3d(mat, n / 2)?;
    Ok(named_3d(mat, n)?
        .into_iter()
        .zip(coarse)
        .map(|((name, value), (_, c))| CheckOutcome {
            name,
            n,
            value,
            tolerance: CHECK_TOL,
            coarse: Some(c),
        })
        .collect())
}

/// Table rows at grid size `n`.
pub fn checks_table(n: usize) -> Result<Vec<CheckOutcome>, CliError> {
    let t = elast3d::fourier_table_check_n(n)?;
    Ok(t.rows
        .into_iter()
        .map(|r| CheckOutcome {
            name: format!("row {}: {} <-> {}", r.row, r.symbol, r.kernel),
            n,
            value: r.discrepancy,
            tolerance: CHECK_TOL,
            coarse: None,
        })
        .collect())
}

fn run_verify3d(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let mat = config
        .constants()
        .ok_or_else(|| CliError::config("materials", "missing"))?;
    let checks = checks_3d(&mat, config.mesh.n)?;
    let path = config.artifact("_verify3d.csv");
    write_file(&path, &report_csv(&checks))?;
    Ok(RunSummary {
        values: checks.iter().map(|c| (c.name.clone(), c.value)).collect(),
        files: vec![path],
    })
}

fn run_table_check(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let checks = checks_table(config.mesh.n)?;
    let path = config.artifact("_table.csv");
    write_file(&path, &report_csv(&checks))?;
    Ok(RunSummary {
        values: checks.iter().map(|c| (c.name.clone(), c.value)).collect(),
        files: vec![path],
    })
}

/// Built-in verification suites of `crackops verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    TwoD,
    ThreeD,
    Table,
}

fn example_pair() -> (ElasticHalfSpace, ElasticHalfSpace) {
    (
        ElasticHalfSpace { shear_modulus: 1.0, poisson_ratio: 0.3 },
        ElasticHalfSpace { shear_modulus: 2.0, poisson_ratio: 0.2 },
    )
}

fn decoupled_pair() -> (ElasticHalfSpace, ElasticHalfSpace) {
    (
        ElasticHalfSpace { shear_modulus: 1.0, poisson_ratio: 0.25 },
        ElasticHalfSpace { shear_modulus: 2.0, poisson_ratio: 0.0 },
    )
}

fn point_config(mode: Mode, materials: (ElasticHalfSpace, ElasticHalfSpace), force: [f64; 3], symmetry: Symmetry) -> ScenarioConfig {
    let general = mode == Mode::Plane
        && compute_constants(&materials.0, &materials.1).is_ok_and(|c| c.d != 0.0);
    let (far, tip) = if general {
        (FREDHOLM_FAR_FACTOR, FREDHOLM_TIP_FRACTION)
    } else {
        (DEFAULT_FAR_FACTOR, DEFAULT_TIP_FRACTION)
    };
    ScenarioConfig {
        mode,
        materials: Some(materials),
        load: LoadSpec::point(1.0, force, symmetry),
        mesh: MeshConfig {
            n: 2048,
            truncation_radius: far,
            grading_ratio: None,
            tip_fraction: tip,
        },
        output: PathBuf::from(DEFAULT_PREFIX),
    }
}

/// Runs a built-in suite; checks report relative errors.
pub fn verify_suite(suite: Suite) -> Result<Vec<CheckOutcome>, CliError> {
    match suite {
        Suite::TwoD => {
            let cases = [
                ("Mode III symmetric", point_config(Mode::Mode3, example_pair(), [0.0, 0.0, 1.0], Symmetry::Symmetric)),
                ("Mode III skew", point_config(Mode::Mode3, example_pair(), [0.0, 0.0, 1.0], Symmetry::Skew)),
                ("plane symmetric, d=0", point_config(Mode::Plane, decoupled_pair(), [0.7, 1.3, 0.0], Symmetry::Symmetric)),
                ("plane skew, d=0", point_config(Mode::Plane, decoupled_pair(), [0.7, 1.3, 0.0], Symmetry::Skew)),
            ];
            let mut out = Vec::new();
            for (name, c) in cases {
                let s = solve(&c)?;
                let oracle = Oracle::for_config(&c).expect("point-force cases have closed forms");
                for ((label, est), (_, r)) in s.sif.iter().zip(oracle.sif()) {
                    out.push(CheckOutcome {
                        name: format!("{name}: {label}"),
                        n: c.mesh.n,
                        value: (est.value - r).abs() / r.abs(),
                        tolerance: 1e-2,
                        coarse: None,
                    });
                }
            }
            let c = point_config(Mode::Plane, example_pair(), [0.7, 1.3, 0.0], Symmetry::Symmetric);
            let s = solve(&c)?;
            let r = s.diagnostics.iter().find(|(l, _)| *l == "coupled_residual").map_or(f64::NAN, |d| d.1);
            out.push(CheckOutcome {
                name: "plane symmetric, d!=0: coupled residual".into(),
                n: c.mesh.n,
                value: r,
                tolerance: 1e-3,
                coarse: None,
            });
            Ok(out)
        }
        Suite::ThreeD => {
            let (u, l) = example_pair();
            checks_3d(&compute_constants(&u, &l)?, DEFAULT_GRID_N)
        }
        Suite::Table => checks_table(DEFAULT_GRID_N),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Largest relative error over the factors.
    pub sif_error: f64,
    /// Max-norm opening error on `[−10a, −a/100]` relative to the max-norm of
    /// the closed form, skipping two nodes either side of the load.
    pub opening_error: f64,
    /// `−log(eᵢ/eᵢ₋₁)/log(nᵢ/nᵢ₋₁)` for the opening error.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub warnings: Vec<String>,
    /// Least-squares slope of `−log e` against `log n`.
    pub observed_order: Option<f64>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,sif_error,opening_error,order\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                fmt_num(r.sif_error),
                fmt_num(r.opening_error),
                r.order.map(fmt_num).unwrap_or_default()
            ));
        }
        s
    }
}

fn opening_error(oracle: &Oracle, s: &SolvedScenario) -> f64 {
    let a = oracle.distance;
    let x = s.crack.nodes();
    let k = s.crack.nearest_index(-a);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for (i, &xi) in x.iter().enumerate() {
        if xi < -10.0 * a || xi > -0.01 * a || i.abs_diff(k) <= 2 {
            continue;
        }
        for (c, e) in oracle.opening(xi).into_iter().enumerate() {
            err = err.max((s.opening[c][i] - e).abs());
            scale = scale.max(e.abs());
        }
    }
    err / scale.max(f64::MIN_POSITIVE)
}

/// Error against the closed form for each `n` (sorted, deduplicated).
pub fn convergence_study(config: &ScenarioConfig, n_list: &[usize]) -> Result<ConvergenceReport, CliError> {
    let oracle = Oracle::for_config(config).ok_or_else(|| {
        CliError::config(
            "mode",
            "convergence study requires analytic case (a single point force in mode3, or in plane with d = 0)",
        )
    })?;
    if n_list.is_empty() {
        return Err(CliError::config("n", "empty list"));
    }
    let mut warnings = Vec::new();
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < n_list.len() {
        warnings.push(format!(
            "duplicate n values removed; running {}",
            ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        ));
    }
    let reference = oracle.sif();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in &ns {
        let mut c = config.clone();
        c.apply_overrides(Some(n), None, None)?;
        let s = solve(&c)?;
        let sif_error = s
            .sif
            .iter()
            .zip(&reference)
            .map(|((_, est), (_, r))| (est.value - r).abs() / r.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let opening_error = opening_error(&oracle, &s);
        let order = rows.last().map(|p| {
            -(opening_error / p.opening_error).ln() / (n as f64 / p.n as f64).ln()
        });
        rows.push(ConvergenceRow { n, sif_error, opening_error, order });
    }
    let observed_order = (rows.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), r.opening_error.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    });
    Ok(ConvergenceReport { rows, warnings, observed_order })
}

/// Runs the study and writes `<prefix>_convergence.csv`.
pub fn run_convergence(config: &ScenarioConfig, n_list: &[usize]) -> Result<(ConvergenceReport, PathBuf), CliError> {
    let report = convergence_study(config, n_list)?;
    let path = config.artifact("_convergence.csv");
    write_file(&path, &report.to_csv())?;
    Ok((report, path))
}
