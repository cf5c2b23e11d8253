//! Run configuration: a sectioned TOML file plus `section.key=value`
//! overrides from the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use apc_lab::dynamics::{Method, PropagationConfig, BOX_MARGIN};
use apc_lab::experiments::SCHEMA_VERSION;
use apc_lab::radial::{Channel, PotentialSpec, Shape, SwitchingProfile};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub potential: PotentialBlock,
    pub profile: ProfileBlock,
    pub grid: GridBlock,
    pub dynamics: DynamicsBlock,
    pub evolve: EvolveBlock,
    pub spectrum: SpectrumBlock,
    pub gef: GefBlock,
    pub resolvent: ResolventBlock,
    pub mollifier: MollifierBlock,
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialBlock {
    pub amplitude: f64,
    pub radius: f64,
    pub shape: Shape,
    pub channel: Channel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileBlock {
    pub s_i: f64,
    pub s_f: f64,
    pub mu_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub h: f64,
    /// Box length for `evolve`; computed from the run length when absent.
    /// Sweeps always size their own box per ε.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsBlock {
    pub dt: f64,
    pub epsilon: f64,
    pub epsilon_list: Vec<f64>,
    pub region_radius: f64,
    pub absorber: bool,
    pub record_stride: usize,
    pub s0: f64,
    /// Freeze point of the no-return check; the profile peak when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub projector_tol: f64,
    pub backward_check: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolveMode {
    Adiabatic,
    Static,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveBlock {
    pub mode: EvolveMode,
    /// Frozen coupling for static runs.
    pub mu: f64,
    /// Microscopic run time for static runs.
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumBlock {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub steps: usize,
    pub box_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GefBlock {
    pub mu_list: Vec<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventBlock {
    pub mu_list: Vec<f64>,
    pub probes: usize,
    pub delta_mu: f64,
    pub box_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierBlock {
    pub mu: f64,
    pub kappa_list: Vec<f64>,
    pub nodes: usize,
    pub kappa_cut: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncate_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
}

fn pow2_list(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 0.5f64.powi(k)).collect()
}

fn log_list(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 20240611,
            potential: PotentialBlock::default(),
            profile: ProfileBlock::default(),
            grid: GridBlock::default(),
            dynamics: DynamicsBlock::default(),
            evolve: EvolveBlock::default(),
            spectrum: SpectrumBlock::default(),
            gef: GefBlock::default(),
            resolvent: ResolventBlock::default(),
            mollifier: MollifierBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

impl Default for PotentialBlock {
    fn default() -> Self {
        PotentialBlock { amplitude: 2.0, radius: 0.5, shape: Shape::SmoothBump, channel: Channel::Plus }
    }
}

impl Default for ProfileBlock {
    fn default() -> Self {
        ProfileBlock { s_i: -1.0, s_f: 1.0, mu_max: 1.5 }
    }
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock { h: 0.05, length: None }
    }
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        DynamicsBlock {
            dt: 0.05,
            epsilon: 1.0 / 128.0,
            epsilon_list: pow2_list(3, 9),
            region_radius: 0.5,
            absorber: false,
            record_stride: 1,
            s0: -0.1,
            sigma: None,
            projector_tol: 1e-8,
            backward_check: true,
        }
    }
}

impl Default for EvolveBlock {
    fn default() -> Self {
        EvolveBlock { mode: EvolveMode::Adiabatic, mu: 1.1, time: 200.0 }
    }
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        SpectrumBlock { mu_lo: 0.0, mu_hi: 1.0, steps: 101, box_length: 40.0 }
    }
}

impl Default for GefBlock {
    fn default() -> Self {
        GefBlock { mu_list: vec![1.01, 1.02], k_min: 0.02, k_max: 2.0, k_count: 61 }
    }
}

impl Default for ResolventBlock {
    fn default() -> Self {
        ResolventBlock { mu_list: vec![0.8, 0.9, 0.95, 0.98, 0.99], probes: 4, delta_mu: 1e-4, box_length: 25.0 }
    }
}

impl Default for MollifierBlock {
    fn default() -> Self {
        MollifierBlock { mu: 1.05, kappa_list: log_list(0.05, 0.4, 12), nodes: 2048, kappa_cut: 0.4, truncate_radius: None }
    }
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: "out".to_string() }
    }
}

/// Problem with the configuration; `line` points into the config file,
/// `origin` names where the text came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
        }
        if let Some(k) = &self.key {
            write!(f, ": {k}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Every dotted key the schema accepts, optional ones included.
pub fn known_keys() -> Vec<String> {
    let mut full = RunConfig::default();
    full.grid.length = Some(0.0);
    full.dynamics.sigma = Some(0.0);
    full.mollifier.truncate_radius = Some(0.0);
    let table = toml::Table::try_from(&full).expect("default config serializes");
    let mut keys = Vec::new();
    for (k, v) in &table {
        match v {
            toml::Value::Table(t) => keys.extend(t.keys().map(|sub| format!("{k}.{sub}"))),
            _ => keys.push(k.clone()),
        }
    }
    keys
}

fn suggest(key: &str, known: &[String]) -> Option<String> {
    known
        .iter()
        .map(|k| (strsim::levenshtein(key, k), k))
        .filter(|(d, _)| *d <= 3)
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k.clone())
}

fn unknown_key(origin: &str, line: Option<usize>, key: &str, known: &[String]) -> ConfigError {
    let message = match suggest(key, known) {
        Some(s) => format!("unknown key; did you mean `{s}`?"),
        None => "unknown key".to_string(),
    };
    ConfigError { origin: origin.to_string(), line, key: Some(key.to_string()), message }
}

/// Dotted key → 1-based line of its assignment, from a line scan.
fn key_lines(text: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            section = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        } else if let Some((k, _)) = line.split_once('=') {
            let k = k.trim().trim_matches('"');
            if k.is_empty() || k.starts_with('#') {
                continue;
            }
            let dotted = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            out.insert(dotted, n + 1);
        }
    }
    out
}

/// Parse a config file's text, apply overrides, and validate.
pub fn parse_config(text: &str, origin: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let err = |line, key: Option<&str>, message: String| ConfigError {
        origin: origin.to_string(),
        line,
        key: key.map(str::to_string),
        message,
    };
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        err(line, None, e.message().to_string())
    })?;
    let lines = key_lines(text);
    let known = known_keys();
    for (k, v) in &table {
        match v {
            toml::Value::Table(t) if known.iter().any(|kk| kk.starts_with(&format!("{k}."))) => {
                for sub in t.keys() {
                    let dotted = format!("{k}.{sub}");
                    if !known.contains(&dotted) {
                        return Err(unknown_key(origin, lines.get(&dotted).copied(), &dotted, &known));
                    }
                }
            }
            _ if known.contains(k) => {}
            _ => {
                let line = lines.get(k).copied().or_else(|| text.lines().position(|l| l.trim() == format!("[{k}]")).map(|p| p + 1));
                return Err(unknown_key(origin, line, k, &known));
            }
        }
    }
    for ov in overrides {
        apply_override(&mut table, ov, &known)?;
    }
    let cfg: RunConfig = table.clone().try_into().map_err(|e: toml::de::Error| err(None, None, e.message().to_string()))?;
    cfg.validate().map_err(|(key, message)| {
        let line = lines.get(&key).copied();
        let origin = if overrides.iter().any(|o| o.split_once('=').map(|(k, _)| k.trim()) == Some(key.as_str())) {
            "override".to_string()
        } else {
            origin.to_string()
        };
        ConfigError { origin, line, key: Some(key), message }
    })?;
    Ok(cfg)
}

/// Apply `section.key=value`; the value is read as a TOML value, falling
/// back to a bare string.
pub fn apply_override(table: &mut toml::Table, ov: &str, known: &[String]) -> Result<(), ConfigError> {
    let bad = |key: Option<&str>, message: String| ConfigError {
        origin: "override".to_string(),
        line: None,
        key: key.map(str::to_string),
        message,
    };
    let (key, raw) = ov.split_once('=').ok_or_else(|| bad(None, format!("`{ov}` is not of the form key=value")))?;
    let key = key.trim();
    if !known.iter().any(|k| k == key) {
        return Err(unknown_key("override", None, key, known));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    match key.split_once('.') {
        Some((section, sub)) => {
            let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let t = entry.as_table_mut().ok_or_else(|| bad(Some(key), format!("`{section}` is not a section")))?;
            t.insert(sub.to_string(), value);
        }
        None => {
            table.insert(key.to_string(), value);
        }
    }
    Ok(())
}

pub fn read_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError { origin: origin.clone(), line: None, key: None, message: e.to_string() })?;
    parse_config(&text, &origin, overrides)
}

pub fn write_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

type Invalid = (String, String);

fn check(ok: bool, key: &str, msg: impl Into<String>) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err((key.to_string(), msg.into()))
    }
}

fn lab_check(key: &str, r: apc_lab::Result<()>) -> Result<(), Invalid> {
    r.map_err(|e| (key.to_string(), e.to_string()))
}

fn positive_list(key: &str, v: &[f64]) -> Result<(), Invalid> {
    check(!v.is_empty(), key, "list is empty")?;
    check(v.iter().all(|x| x.is_finite() && *x > 0.0), key, "entries must be finite and > 0")
}

impl RunConfig {
    pub fn raw_potential(&self) -> apc_lab::Result<PotentialSpec> {
        PotentialSpec::new(self.potential.amplitude, self.potential.radius, self.potential.shape)
    }

    pub fn switching_profile(&self) -> apc_lab::Result<SwitchingProfile> {
        SwitchingProfile::new(self.profile.s_i, self.profile.s_f, self.profile.mu_max)
    }

    pub fn propagation(&self, epsilon: f64) -> PropagationConfig {
        PropagationConfig {
            dt: self.dynamics.dt,
            method: Method::CrankNicolson,
            epsilon,
            region_radius: self.dynamics.region_radius,
            record_stride: self.dynamics.record_stride,
            absorber: self.dynamics.absorber,
            snapshot_stride: None,
        }
    }

    /// Box length for a single `evolve` run.
    pub fn evolve_length(&self) -> f64 {
        let needed = match self.evolve.mode {
            EvolveMode::Adiabatic => {
                let (_, hi) = self.switching_profile().map(|p| p.support()).unwrap_or((0.0, self.profile.s_f));
                (hi - self.dynamics.s0) / self.dynamics.epsilon
            }
            EvolveMode::Static => self.evolve.time,
        };
        needed + self.potential.radius + BOX_MARGIN
    }

    /// Every precondition the library would check later, keyed by the
    /// offending config entry.
    pub fn validate(&self) -> Result<(), Invalid> {
        check(self.schema_version == SCHEMA_VERSION, "schema_version", format!("unsupported schema version, expected {SCHEMA_VERSION}"))?;
        let pot = PotentialSpec { amplitude: self.potential.amplitude, radius: self.potential.radius, shape: self.potential.shape, rescale_factor: 1.0 };
        lab_check("potential.amplitude", pot.validate())?;
        check(self.potential.amplitude > 0.0, "potential.amplitude", "a zero well has no critical coupling")?;
        let profile = self.switching_profile().map_err(|e| ("profile.mu_max".to_string(), e.to_string()))?;
        check(self.grid.h > 0.0 && self.grid.h <= 0.1, "grid.h", "spacing must lie in (0, 0.1]")?;
        lab_check("dynamics.dt", self.propagation(self.dynamics.epsilon).validate(&pot))?;
        positive_list("dynamics.epsilon_list", &self.dynamics.epsilon_list)?;
        check(self.dynamics.epsilon_list.iter().all(|e| *e <= 1.0), "dynamics.epsilon_list", "entries must be <= 1")?;
        let (lo, hi) = profile.support();
        check(self.dynamics.s0 < 0.0 && self.dynamics.s0 > lo, "dynamics.s0", format!("must lie in ({lo}, 0)"))?;
        if let Some(s) = self.dynamics.sigma {
            check(s >= 0.0 && s < hi, "dynamics.sigma", format!("must lie in [0, {hi})"))?;
        }
        check(self.dynamics.projector_tol > 0.0 && self.dynamics.projector_tol < 1.0, "dynamics.projector_tol", "must lie in (0, 1)")?;
        check(self.evolve.mu > 1.0, "evolve.mu", "static runs need an overcritical coupling mu > 1")?;
        check(self.evolve.time > 0.0 && self.evolve.time.is_finite(), "evolve.time", "must be finite and > 0")?;
        if let Some(l) = self.grid.length {
            let need = self.evolve_length();
            check(l >= need, "grid.length", format!("box of length {l} is shorter than the {need} the run needs"))?;
        }
        check(self.spectrum.mu_lo >= 0.0 && self.spectrum.mu_lo < self.spectrum.mu_hi, "spectrum.mu_lo", "need 0 <= mu_lo < mu_hi")?;
        check(self.spectrum.mu_hi <= profile.mu_max, "spectrum.mu_hi", "must not exceed profile.mu_max")?;
        check(self.spectrum.steps >= 2, "spectrum.steps", "need at least 2 steps")?;
        check(self.spectrum.box_length >= 2.0 * self.potential.radius, "spectrum.box_length", "box must hold the well")?;
        positive_list("gef.mu_list", &self.gef.mu_list)?;
        check(self.gef.mu_list.iter().all(|m| *m > 1.0), "gef.mu_list", "resonance scans need mu > 1")?;
        check(self.gef.k_min > 0.0 && self.gef.k_min < self.gef.k_max, "gef.k_min", "need 0 < k_min < k_max")?;
        check(self.gef.k_count >= 8, "gef.k_count", "need at least 8 momenta")?;
        positive_list("resolvent.mu_list", &self.resolvent.mu_list)?;
        check(self.resolvent.mu_list.iter().all(|m| *m < 1.0), "resolvent.mu_list", "entries must be < 1")?;
        check(self.resolvent.probes >= 1, "resolvent.probes", "need at least one probe")?;
        check(self.resolvent.delta_mu > 0.0 && self.resolvent.delta_mu < 0.01, "resolvent.delta_mu", "must lie in (0, 0.01)")?;
        check(self.resolvent.box_length >= 2.0 * self.potential.radius, "resolvent.box_length", "box must hold the well")?;
        check(self.mollifier.mu > 1.0, "mollifier.mu", "must be > 1")?;
        positive_list("mollifier.kappa_list", &self.mollifier.kappa_list)?;
        check(self.mollifier.nodes >= 16 && self.mollifier.nodes <= apc_lab::gef::BASIS_MAX_NODES, "mollifier.nodes", format!("must lie in [16, {}]", apc_lab::gef::BASIS_MAX_NODES))?;
        check(self.mollifier.kappa_cut > 0.0, "mollifier.kappa_cut", "must be > 0")?;
        if let Some(r) = self.mollifier.truncate_radius {
            check(r > 0.0, "mollifier.truncate_radius", "must be > 0")?;
        }
        check(!self.output.dir.is_empty(), "output.dir", "must not be empty")?;
        Ok(())
    }
}
