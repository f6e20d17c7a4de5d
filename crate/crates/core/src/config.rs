//! Experiment configuration: JSON checked against the published schema, then turned
//! into typed settings and domain objects.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dispersion::{DispersionMethod, ScanConfig};
use crate::dynamics::SelfConsistentScheme;
use crate::error::{Error, Result, SchemaViolation};
use crate::profiles::{InteractionPotential, PotentialFamily, ProfileFamily, VelocityProfile};
use crate::response::KernelSource;
use crate::spectral::{DensityMatrixState, DensityRule, TimeGrid, TorusGrid, C64};
use crate::verify::StrichartzParams;

pub const SCHEMA: &str = include_str!("../schema/experiment.schema.json");

pub fn schema() -> Value {
    serde_json::from_str(SCHEMA).expect("bundled schema is valid JSON")
}

/// Checks `value` against the subset of JSON Schema used by the bundled schema
/// (type, properties, required, additionalProperties, enum, minimum, maximum,
/// exclusiveMinimum, items, minItems, maxItems) and returns every violation.
pub fn validate(value: &Value, schema: &Value) -> Vec<SchemaViolation> {
    let mut out = vec![];
    check(value, schema, "", &mut out);
    out
}

fn type_matches(v: &Value, t: &str) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        _ => false,
    }
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn check(v: &Value, s: &Value, ptr: &str, out: &mut Vec<SchemaViolation>) {
    let at = |m: String| SchemaViolation { pointer: if ptr.is_empty() { "/".into() } else { ptr.into() }, message: m };
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_matches(v, t),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_matches(v, t)),
            _ => true,
        };
        if !ok {
            out.push(at(format!("expected {t}, found {v}")));
            return;
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            let opts: Vec<String> = options.iter().map(|o| o.to_string()).collect();
            out.push(at(format!("{v} is not one of {}", opts.join(", "))));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(m) = s.get("minimum").and_then(Value::as_f64) {
            if x < m {
                out.push(at(format!("{x} is below the minimum {m}")));
            }
        }
        if let Some(m) = s.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= m {
                out.push(at(format!("{x} must be greater than {m}")));
            }
        }
        if let Some(m) = s.get("maximum").and_then(Value::as_f64) {
            if x > m {
                out.push(at(format!("{x} is above the maximum {m}")));
            }
        }
    }
    if let Value::Object(map) = v {
        let props = s.get("properties").and_then(Value::as_object);
        if let Some(Value::Array(req)) = s.get("required") {
            for r in req.iter().filter_map(Value::as_str) {
                if !map.contains_key(r) {
                    out.push(at(format!("missing required key \"{r}\"")));
                }
            }
        }
        for (k, child) in map {
            let p = format!("{ptr}/{}", escape(k));
            match props.and_then(|p| p.get(k)) {
                Some(cs) => check(child, cs, &p, out),
                None => {
                    if s.get("additionalProperties") == Some(&Value::Bool(false)) {
                        out.push(SchemaViolation { pointer: p, message: format!("unknown key \"{k}\"") });
                    }
                }
            }
        }
    }
    if let Value::Array(items) = v {
        if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < n {
                out.push(at(format!("needs at least {n} items")));
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > n {
                out.push(at(format!("allows at most {n} items")));
            }
        }
        if let Some(is) = s.get("items") {
            for (i, it) in items.iter().enumerate() {
                check(it, is, &format!("{ptr}/{i}"), out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_length")]
    pub length: f64,
}

fn d_n() -> usize {
    32
}
fn d_length() -> f64 {
    20.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: d_n(), length: d_length() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_t_final")]
    pub t_final: f64,
    #[serde(default = "d_stride")]
    pub store_stride: usize,
}

fn d_dt() -> f64 {
    0.02
}
fn d_t_final() -> f64 {
    20.0
}
fn d_stride() -> usize {
    50
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { dt: d_dt(), t_final: d_t_final(), store_stride: d_stride() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub family: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub separation: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    pub csv: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: String,
    pub coupling: Option<f64>,
    /// Sets ŵ directly for the delta family.
    pub fourier_value: Option<f64>,
    pub width: Option<f64>,
    pub mass: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Rank1,
    Random,
    File,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "d_kind")]
    pub kind: InitialKind,
    #[serde(default = "d_amp")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

fn d_kind() -> InitialKind {
    InitialKind::Rank1
}
fn d_amp() -> f64 {
    0.01
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { kind: d_kind(), amplitude: d_amp(), width: 1.0, seed: None, path: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolveScheme {
    #[default]
    Direct,
    #[value(name = "fixedpoint")]
    #[serde(rename = "fixedpoint")]
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub scheme: SolveScheme,
    #[serde(default)]
    pub self_consistent: SelfConsistentScheme,
    #[serde(default)]
    pub density_rule: DensityRule,
    pub s: Option<f64>,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_iter")]
    pub max_iter: usize,
    #[serde(default = "one")]
    pub damping: f64,
    pub scattering_window: Option<[f64; 2]>,
}

fn d_tol() -> f64 {
    1e-8
}
fn d_iter() -> usize {
    50
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            scheme: SolveScheme::Direct,
            self_consistent: SelfConsistentScheme::default(),
            density_rule: DensityRule::default(),
            s: None,
            tol: d_tol(),
            max_iter: d_iter(),
            damping: 1.0,
            scattering_window: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub tau_grid: Option<Vec<f64>>,
    pub n_omega: Option<usize>,
    pub n_xi: Option<usize>,
    pub xi_max: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_refinements: Option<usize>,
    pub stability_threshold: Option<f64>,
    pub method: Option<DispersionMethod>,
}

impl ScanSpec {
    pub fn to_scan_config(&self, force: bool) -> ScanConfig {
        let d = ScanConfig::default();
        ScanConfig {
            tau_grid: self.tau_grid.clone().unwrap_or(d.tau_grid),
            n_omega: self.n_omega.unwrap_or(d.n_omega),
            n_xi: self.n_xi.unwrap_or(d.n_xi),
            xi_max: self.xi_max.or(d.xi_max),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            max_refinements: self.max_refinements.unwrap_or(d.max_refinements),
            stability_threshold: self.stability_threshold.unwrap_or(d.stability_threshold),
            force,
            method: self.method.unwrap_or(d.method),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Continuum,
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ResponseMode {
    #[default]
    Apply,
    Invert,
    Linear,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSpec {
    #[serde(default)]
    pub kernel: KernelKind,
    #[serde(default)]
    pub mode: ResponseMode,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    #[default]
    Strichartz,
    Hs,
    Weights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default)]
    pub suite: Suite,
    #[serde(default = "d_samples")]
    pub n_samples: usize,
    #[serde(default = "d_levels")]
    pub levels: usize,
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    #[serde(default)]
    pub probe_sharpness: bool,
    #[serde(default = "d_a")]
    pub alpha1: f64,
    #[serde(default = "d_a")]
    pub alpha2: f64,
    #[serde(default = "d_fields")]
    pub hs_fields: usize,
}

fn d_samples() -> usize {
    50
}
fn d_levels() -> usize {
    2
}
fn d_a() -> f64 {
    0.6
}
fn d_fields() -> usize {
    10
}

impl Default for VerifySpec {
    fn default() -> Self {
        serde_json::from_value(Value::Object(Default::default())).expect("defaults deserialize")
    }
}

impl VerifySpec {
    /// Explicit exponents override the energy point of dimension d.
    pub fn strichartz_params(&self, d: usize) -> StrichartzParams {
        let e = StrichartzParams::energy_point(d);
        StrichartzParams {
            s: self.s.unwrap_or(e.s),
            p: self.p.unwrap_or(e.p),
            q: self.q.unwrap_or(e.q),
            alpha: self.alpha.unwrap_or(e.alpha),
            sigma1: self.sigma1.unwrap_or(e.sigma1),
            sigma2: self.sigma2.unwrap_or(e.sigma2),
            probe_sharpness: self.probe_sharpness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "d_dir")]
    pub dir: PathBuf,
    #[serde(default = "d_formats")]
    pub formats: Vec<String>,
}

fn d_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_formats() -> Vec<String> {
    vec!["json".into(), "csv".into(), "bin".into()]
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: d_dir(), formats: d_formats() }
    }
}

impl OutputSpec {
    pub fn wants(&self, fmt: &str) -> bool {
        self.formats.iter().any(|f| f == fmt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub time: TimeSpec,
    pub profile: ProfileSpec,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub response: ResponseSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn need<T: Copy>(v: Option<T>, ptr: &str, what: &str, out: &mut Vec<SchemaViolation>) -> Option<T> {
    if v.is_none() {
        out.push(SchemaViolation { pointer: ptr.into(), message: format!("required for {what}") });
    }
    v
}

impl ExperimentConfig {
    /// Schema check, typed parse and cross-field checks, reporting all violations at once.
    pub fn from_value(value: &Value, base_dir: &Path) -> Result<Self> {
        let mut violations = validate(value, &schema());
        if !violations.is_empty() {
            return Err(Error::Schema(violations));
        }
        let mut cfg: Self = serde_json::from_value(value.clone())
            .map_err(|e| Error::Schema(vec![SchemaViolation { pointer: "/".into(), message: e.to_string() }]))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.cross_check(&mut violations);
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Schema(violations))
        }
    }

    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Schema(vec![SchemaViolation { pointer: "/".into(), message: format!("not JSON: {e}") }]))?;
        Self::from_value(&value, base_dir)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, &base)
    }

    fn cross_check(&self, out: &mut Vec<SchemaViolation>) {
        if !self.grid.n.is_multiple_of(2) {
            out.push(SchemaViolation { pointer: "/grid/n".into(), message: "must be even".into() });
        }
        let p = &self.profile;
        let fam = p.family.as_str();
        match fam {
            "gaussian" => {
                need(p.beta, "/profile/beta", "the gaussian family", out);
            }
            "fermi_dirac" => {
                need(p.beta, "/profile/beta", "the fermi_dirac family", out);
                need(p.mu, "/profile/mu", "the fermi_dirac family", out);
            }
            "two_stream" => {
                need(p.beta, "/profile/beta", "the two_stream family", out);
                need(p.separation, "/profile/separation", "the two_stream family", out);
            }
            "ball_indicator" => {
                need(p.mu, "/profile/mu", "the ball_indicator family", out);
            }
            _ => {
                let inline = p.r.is_some() && p.values.is_some();
                if inline == p.csv.is_some() {
                    out.push(SchemaViolation {
                        pointer: "/profile".into(),
                        message: "tabulated_radial needs either r and values or csv".into(),
                    });
                }
                if let (Some(r), Some(v)) = (&p.r, &p.values) {
                    if r.len() != v.len() {
                        out.push(SchemaViolation { pointer: "/profile/values".into(), message: "length differs from r".into() });
                    }
                }
            }
        }
        let w = &self.potential;
        match w.family.as_str() {
            "delta" => {
                if w.coupling.is_some() == w.fourier_value.is_some() {
                    out.push(SchemaViolation {
                        pointer: "/potential".into(),
                        message: "delta needs exactly one of coupling and fourier_value".into(),
                    });
                }
            }
            "gaussian" => {
                need(w.coupling, "/potential/coupling", "the gaussian family", out);
                need(w.width, "/potential/width", "the gaussian family", out);
            }
            "yukawa" => {
                need(w.coupling, "/potential/coupling", "the yukawa family", out);
                need(w.mass, "/potential/mass", "the yukawa family", out);
            }
            _ => match (&w.xi, &w.values) {
                (Some(x), Some(v)) if x.len() == v.len() => {}
                (Some(_), Some(_)) => {
                    out.push(SchemaViolation { pointer: "/potential/values".into(), message: "length differs from xi".into() })
                }
                _ => out.push(SchemaViolation {
                    pointer: "/potential".into(),
                    message: "tabulated_radial needs xi and values".into(),
                }),
            },
        }
        if w.family != "delta" && w.fourier_value.is_some() {
            out.push(SchemaViolation { pointer: "/potential/fourier_value".into(), message: "only meaningful for delta".into() });
        }
        if self.initial.kind == InitialKind::File && self.initial.path.is_none() {
            out.push(SchemaViolation { pointer: "/initial/path".into(), message: "required for kind \"file\"".into() });
        }
        if let Some([a, b]) = self.solver.scattering_window {
            if b <= a {
                out.push(SchemaViolation { pointer: "/solver/scattering_window".into(), message: "end must exceed start".into() });
            }
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dimension, self.grid.n, self.grid.length)
    }

    /// Steps are rounded so that n·dt lands on t_final.
    pub fn time_grid(&self) -> Result<TimeGrid> {
        let n = (self.time.t_final / self.time.dt).round().max(1.0) as usize;
        TimeGrid::from_final(self.time.t_final, n)
    }

    pub fn profile(&self) -> Result<VelocityProfile> {
        let p = &self.profile;
        let d = self.dimension;
        let family = match p.family.as_str() {
            "gaussian" => ProfileFamily::Gaussian { beta: p.beta.unwrap_or_default() },
            "fermi_dirac" => ProfileFamily::FermiDirac { beta: p.beta.unwrap_or_default(), mu: p.mu.unwrap_or_default() },
            "two_stream" => {
                ProfileFamily::TwoStream { beta: p.beta.unwrap_or_default(), separation: p.separation.unwrap_or_default() }
            }
            "ball_indicator" => ProfileFamily::BallIndicator { mu: p.mu.unwrap_or_default() },
            _ => {
                let (r, mut values) = match &p.csv {
                    Some(path) => crate::io::read_radial_csv(&self.resolve(path))?,
                    None => (p.r.clone().unwrap_or_default(), p.values.clone().unwrap_or_default()),
                };
                values.iter_mut().for_each(|v| *v *= p.amplitude);
                return VelocityProfile::tabulated(d, r, values);
            }
        };
        VelocityProfile::new(d, p.amplitude, family)
    }

    pub fn potential(&self) -> Result<InteractionPotential> {
        let w = &self.potential;
        let d = self.dimension;
        if let Some(v) = w.fourier_value {
            return InteractionPotential::delta_with_fourier(d, v);
        }
        let family = match w.family.as_str() {
            "delta" => PotentialFamily::Delta { coupling: w.coupling.unwrap_or_default() },
            "gaussian" => PotentialFamily::Gaussian { coupling: w.coupling.unwrap_or_default(), width: w.width.unwrap_or(1.0) },
            "yukawa" => PotentialFamily::Yukawa { coupling: w.coupling.unwrap_or_default(), mass: w.mass.unwrap_or(1.0) },
            _ => PotentialFamily::TabulatedRadial { xi: w.xi.clone().unwrap_or_default(), values: w.values.clone().unwrap_or_default() },
        };
        InteractionPotential::new(d, family)
    }

    /// Q_in; rank1 is a centred Gaussian bump of the configured width.
    pub fn initial_state(&self, grid: &TorusGrid, seed: u64) -> Result<DensityMatrixState> {
        let i = &self.initial;
        match i.kind {
            InitialKind::Zero => Ok(DensityMatrixState::zeros(grid)),
            InitialKind::Rank1 => {
                let c = grid.length() / 2.0;
                let w2 = i.width * i.width;
                Ok(DensityMatrixState::rank_one(grid, i.amplitude, |x| {
                    C64::new((-x.iter().map(|y| (y - c).powi(2)).sum::<f64>() / w2).exp(), 0.0)
                }))
            }
            InitialKind::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(i.seed.unwrap_or(seed));
                Ok(DensityMatrixState::random_hermitian(grid, i.amplitude, &mut rng))
            }
            InitialKind::File => {
                let q = crate::io::read_matrix(&self.resolve(i.path.as_deref().unwrap_or(Path::new(""))))?;
                if q.grid.dim() != grid.dim() || q.grid.n() != grid.n() || q.grid.length() != grid.length() {
                    return Err(Error::InvalidInput("initial state file was written on a different grid".into()));
                }
                Ok(q)
            }
        }
    }

    pub fn kernel_source(&self) -> KernelSource {
        match self.response.kernel {
            KernelKind::Continuum => KernelSource::Continuum,
            KernelKind::Lattice => KernelSource::Lattice(self.solver.density_rule),
        }
    }

    pub fn self_consistent(&self) -> SelfConsistentScheme {
        self.solver.self_consistent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"dimension": 1, "profile": {"family": "gaussian", "beta": 1.0},
        "potential": {"family": "delta", "coupling": 0.5}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_str(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(c.grid, GridSpec { n: 32, length: 20.0 });
        assert_eq!(c.time.dt, 0.02);
        assert_eq!(c.solver.scheme, SolveScheme::Direct);
        assert_eq!(c.solver.self_consistent, SelfConsistentScheme::Explicit);
        assert_eq!(c.initial.kind, InitialKind::Rank1);
        assert_eq!(c.profile.amplitude, 1.0);
        c.profile().unwrap();
        c.potential().unwrap();
    }

    #[test]
    fn all_violations_are_reported_with_pointers() {
        let text = r#"{"dimension": 1, "potental": {}, "time": {"dt": -0.1},
            "profile": {"family": "gaussian", "beta": 1.0}, "potential": {"family": "delta", "coupling": 1}}"#;
        let Err(Error::Schema(v)) = ExperimentConfig::from_str(text, Path::new(".")) else { panic!() };
        let ptrs: Vec<&str> = v.iter().map(|x| x.pointer.as_str()).collect();
        assert!(ptrs.contains(&"/time/dt"), "{v:?}");
        assert!(v.iter().any(|x| x.pointer == "/potental" && x.message.contains("potental")), "{v:?}");
    }

    #[test]
    fn family_fields_are_cross_checked() {
        let text = r#"{"dimension": 2, "grid": {"n": 7}, "profile": {"family": "two_stream", "beta": 1.0},
            "potential": {"family": "delta", "coupling": 1, "fourier_value": 0.3}}"#;
        let Err(Error::Schema(v)) = ExperimentConfig::from_str(text, Path::new(".")) else { panic!() };
        let ptrs: Vec<&str> = v.iter().map(|x| x.pointer.as_str()).collect();
        assert_eq!(ptrs, vec!["/grid/n", "/profile/separation", "/potential"]);
    }

    #[test]
    fn validator_handles_nested_arrays() {
        let s = schema();
        let v: Value = serde_json::from_str(r#"{"dimension": 4, "profile": {"family": "x"}, "potential": {"family": "delta"},
            "scan": {"tau_grid": [0.1, -1]}}"#)
        .unwrap();
        let ptrs: Vec<String> = validate(&v, &s).into_iter().map(|x| x.pointer).collect();
        assert_eq!(ptrs, vec!["/dimension", "/profile/family", "/scan/tau_grid/1"]);
    }
}
