//! Run configuration: a versioned TOML file, environment overrides and
//! command-line overrides, applied in that order on top of the defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blowup::HopfOptions;
use crate::filippov::{DomainBox, FnSystem};
use crate::integrator::HybridOptions;
use crate::scan::Budget;
use crate::welander::{Chart, WelanderParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Prefix shared by every environment override.
pub const ENV_PREFIX: &str = "FUSEDFOCUS_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid value {value:?} for {var}: {reason}")]
    Env { var: String, value: String, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    #[default]
    WelanderNonsmooth,
    WelanderSmooth,
    /// Two affine fields split by a line, see [`LinearSystem`].
    Custom,
}

impl std::str::FromStr for SystemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "welander-nonsmooth" => Ok(Self::WelanderNonsmooth),
            "welander-smooth" => Ok(Self::WelanderSmooth),
            "custom" => Ok(Self::Custom),
            _ => Err("expected welander-nonsmooth, welander-smooth or custom".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            _ => Err("expected csv, json or svg".into()),
        }
    }
}

/// Planar system `ẋ = A±x + b±` on either side of `c·x = d`, with `+` where
/// `c·x > d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystem {
    pub a_plus: [[f64; 2]; 2],
    pub b_plus: [f64; 2],
    pub a_minus: [[f64; 2]; 2],
    pub b_minus: [f64; 2],
    pub normal: [f64; 2],
    #[serde(default)]
    pub offset: f64,
    /// Admissible states and the window searched for tangencies.
    #[serde(default = "default_window")]
    pub window: DomainBox,
}

fn default_window() -> DomainBox {
    DomainBox::new(vec![-5.0, -5.0], vec![5.0, 5.0])
}

impl LinearSystem {
    pub fn to_system(&self) -> FnSystem {
        let affine = |m: [[f64; 2]; 2], b: [f64; 2]| {
            move |x: &[f64]| vec![m[0][0] * x[0] + m[0][1] * x[1] + b[0], m[1][0] * x[0] + m[1][1] * x[1] + b[1]]
        };
        let (c, d) = (self.normal, self.offset);
        FnSystem::new(
            self.window.clone(),
            affine(self.a_plus, self.b_plus),
            affine(self.a_minus, self.b_minus),
            move |x| c[0] * x[0] + c[1] * x[1] - d,
            move |_| c.to_vec(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Chart of `initial` and of the written samples.
    pub chart: Chart,
    pub initial: Vec<[f64; 2]>,
    pub t_span: [f64; 2],
    pub integration: HybridOptions,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { chart: Chart::Xy, initial: vec![[0.5, 0.2]], t_span: [0.0, 100.0], integration: HybridOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlidingConfig {
    /// Manifold samples used to split it into crossing and sliding arcs.
    pub samples: usize,
}

impl Default for SlidingConfig {
    fn default() -> Self {
        Self { samples: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub eps: Vec<f64>,
    /// Regularisation widths; empty means `[params.a]` for the smooth system.
    pub a: Vec<f64>,
    pub budget: Budget,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { eps: vec![-0.04, 0.0, 0.04], a: Vec::new(), budget: Budget::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupConfig {
    pub eps_range: [f64; 2],
    pub points: usize,
    /// Also locate the eigenvalue crossing numerically.
    pub numeric: bool,
    pub hopf: HopfOptions,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            eps_range: [-0.1, 0.02],
            points: 241,
            numeric: true,
            hopf: HopfOptions { measure_amplitude: false, ..HopfOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Random cases per invariant.
    pub cases: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { cases: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    /// Write the data product to stdout instead of `dir`.
    pub stdout: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv, stdout: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema: u32,
    pub system: SystemKind,
    pub params: WelanderParams,
    pub custom: Option<LinearSystem>,
    pub simulate: SimulateConfig,
    pub sliding: SlidingConfig,
    pub scan: ScanConfig,
    pub blowup: BlowupConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
    pub seed: u64,
    /// Worker threads for scans; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            system: SystemKind::default(),
            params: WelanderParams::default(),
            custom: None,
            simulate: SimulateConfig::default(),
            sliding: SlidingConfig::default(),
            scan: ScanConfig::default(),
            blowup: BlowupConfig::default(),
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
            threads: 0,
        }
    }
}

/// Values given on the command line; `None` leaves the lower layers alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub stdout: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// Applies `FUSEDFOCUS_*` variables read through `lookup`.
    pub fn apply_env(&mut self, lookup: &dyn Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(var: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.trim().parse::<T>().map_err(|e| ConfigError::Env {
                var: var.to_string(),
                value: value.to_string(),
                reason: e.to_string(),
            })
        }
        let get = |name: &str| {
            let var = format!("{ENV_PREFIX}{name}");
            lookup(&var).map(|v| (var, v))
        };
        if let Some((var, v)) = get("SYSTEM") {
            self.system = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("ALPHA") {
            self.params.alpha = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("BETA") {
            self.params.beta = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("EPSILON") {
            self.params.epsilon = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("A") {
            self.params.a = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("SEED") {
            self.seed = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("THREADS") {
            self.threads = parse(&var, &v)?;
        }
        if let Some((_, v)) = get("OUT") {
            self.output.dir = PathBuf::from(v);
        }
        if let Some((var, v)) = get("FORMAT") {
            self.output.format = parse(&var, &v)?;
        }
        if let Some((var, v)) = get("STDOUT") {
            self.output.stdout = parse(&var, &v)?;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.threads {
            self.threads = t;
        }
        if o.stdout {
            self.output.stdout = true;
        }
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.schema != SCHEMA_VERSION {
            return invalid(format!("schema {} is not supported (expected {SCHEMA_VERSION})", self.schema));
        }
        self.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        match self.system {
            SystemKind::WelanderSmooth if !self.params.is_smooth() => {
                return invalid(format!("welander-smooth needs params.a > 0 (got {})", self.params.a));
            }
            SystemKind::Custom if self.custom.is_none() => {
                return invalid("system = \"custom\" needs a [custom] table".into());
            }
            _ => {}
        }
        if let Some(c) = &self.custom {
            if c.normal == [0.0, 0.0] {
                return invalid("custom.normal must be nonzero".into());
            }
            if c.window.lo.len() != 2 || c.window.hi.len() != 2 {
                return invalid("custom.window must be planar".into());
            }
        }
        let [t0, t1] = self.simulate.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return invalid(format!("simulate.t_span [{t0}, {t1}] is empty"));
        }
        if self.simulate.initial.is_empty() || self.simulate.initial.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("simulate.initial needs at least one finite state".into());
        }
        if self.sliding.samples < 2 {
            return invalid("sliding.samples must be at least 2".into());
        }
        if self.scan.eps.is_empty() || self.scan.eps.iter().any(|v| !v.is_finite()) {
            return invalid("scan.eps must be a nonempty list of finite values".into());
        }
        if self.scan.a.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid("scan.a values must be positive".into());
        }
        let [lo, hi] = self.blowup.eps_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || self.blowup.points < 2 {
            return invalid(format!("blowup grid [{lo}, {hi}] with {} points is malformed", self.blowup.points));
        }
        if self.verify.cases == 0 {
            return invalid("verify.cases must be positive".into());
        }
        Ok(())
    }

    pub fn threads(&self) -> Option<usize> {
        (self.threads > 0).then_some(self.threads)
    }
}

/// Reads the file (if any), then applies environment and flag overrides, and
/// validates the result.
pub fn resolve(
    path: Option<&Path>,
    lookup: &dyn Fn(&str) -> Option<String>,
    overrides: &Overrides,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env(lookup)?;
    cfg.apply_overrides(overrides);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.params.alpha, 0.8);
        assert_eq!(cfg.params.beta, 0.5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("epsilon = 0.1").is_err());
        assert!(RunConfig::from_toml("[params]\ngamma = 1").is_err());
        assert!(RunConfig::from_toml("[simulate.integration.ode]\nrtoll = 1e-9").is_err());
    }

    #[test]
    fn precedence_flags_over_env_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 1\n[params]\nepsilon = 0.01\n[output]\nformat = \"json\"\n").unwrap();
        let env = |k: &str| match k {
            "FUSEDFOCUS_SEED" => Some("2".to_string()),
            "FUSEDFOCUS_EPSILON" => Some("-0.02".to_string()),
            _ => None,
        };
        let cfg = resolve(Some(&path), &env, &Overrides { seed: Some(3), ..Default::default() }).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.params.epsilon, -0.02);
        assert_eq!(cfg.output.format, Format::Json);
        let cfg = resolve(Some(&path), &no_env, &Overrides::default()).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.params.epsilon, 0.01);
    }

    #[test]
    fn bad_env_value_is_a_config_error() {
        let env = |k: &str| (k == "FUSEDFOCUS_FORMAT").then(|| "png".to_string());
        assert!(matches!(resolve(None, &env, &Overrides::default()), Err(ConfigError::Env { .. })));
    }

    #[test]
    fn empty_t_span_rejected() {
        let cfg = RunConfig::from_toml("[simulate]\nt_span = [5.0, 5.0]").unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(m)) if m.contains("t_span")));
    }

    #[test]
    fn smooth_system_needs_positive_a() {
        let cfg = RunConfig::from_toml("system = \"welander-smooth\"").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::from_toml("system = \"welander-smooth\"\n[params]\na = 0.01").unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn custom_system_round_trips() {
        let text = r#"
system = "custom"
[custom]
a_plus = [[0.0, 0.0], [0.0, 0.0]]
b_plus = [1.0, -1.0]
a_minus = [[0.0, 0.0], [0.0, 0.0]]
b_minus = [1.0, 1.0]
normal = [0.0, 1.0]
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        cfg.validate().unwrap();
        let back = RunConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
