//! JSON run configuration: parsing, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use qspectral::{KernelOptions, LatticeSpec, Mode, QParam, Sign, TimeProfile};
use serde::{Deserialize, Serialize};

pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_NODES: usize = qspectral::solvers::DEFAULT_TIME_NODES;
pub const DEFAULT_PANELS: usize = qspectral::solvers::DEFAULT_PANELS;
pub const DEFAULT_LIMIT_QS: [f64; 3] = [0.9, 0.99, 0.999];
pub const DEFAULT_LIMIT_WINDOW: [f64; 2] = [0.25, 4.0];

/// Problem kind and coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Heat { m: f64 },
    Wave { b: f64, m: f64 },
    ForcedWave { b: f64, m: f64 },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Heat { .. } => "heat",
            ProblemSpec::Wave { .. } => "wave",
            ProblemSpec::ForcedWave { .. } => "forced-wave",
        }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

/// Named analytic data sampled on the lattice, or a CSV file of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSelector {
    /// `amplitude · exp(-a (x - center)²)`.
    GaussianBump {
        #[serde(default = "one")]
        a: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `1` at the single point `sign · q^k`.
    Indicator {
        k: i64,
        #[serde(default)]
        sign: Option<Sign>,
    },
    /// `(1 - (x/radius)²)^degree` for `|x| < radius`, else `0`.
    PolynomialWindow {
        #[serde(default = "two")]
        degree: u32,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `x ↦ e_{q²}(i λ x)` with `λ = sign · q^j`.
    KernelSample {
        j: i64,
        #[serde(default)]
        sign: Option<Sign>,
    },
    /// Samples in the `k,sign,re,im` CSV format.
    Csv { path: PathBuf },
}

impl Default for DataSelector {
    fn default() -> Self {
        DataSelector::GaussianBump {
            a: 1.0,
            center: 0.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeSpec {
    Constant,
    Linear,
    ExpDecay { rate: f64 },
    Cos { omega: f64 },
}

impl TimeSpec {
    pub fn profile(&self) -> TimeProfile<f64> {
        match *self {
            TimeSpec::Constant => TimeProfile::Constant,
            TimeSpec::Linear => TimeProfile::Linear,
            TimeSpec::ExpDecay { rate } => TimeProfile::ExpDecay(rate),
            TimeSpec::Cos { omega } => TimeProfile::Cos(omega),
        }
    }
}

/// Separable forcing `g(t) h(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub profile: DataSelector,
    #[serde(default = "constant")]
    pub time: TimeSpec,
}

fn constant() -> TimeSpec {
    TimeSpec::Constant
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    pub qs: Vec<f64>,
    pub window: [f64; 2],
}

impl Default for LimitSpec {
    fn default() -> Self {
        Self {
            qs: DEFAULT_LIMIT_QS.to_vec(),
            window: DEFAULT_LIMIT_WINDOW,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    q: f64,
    k_min: i64,
    k_max: i64,
    mode: Option<String>,
    problem: Option<ProblemSpec>,
    initial: Option<DataSelector>,
    velocity: Option<DataSelector>,
    forcing: Option<ForcingSpec>,
    #[serde(rename = "T")]
    t_final: Option<f64>,
    time_nodes: Option<usize>,
    panels: Option<usize>,
    kernel_tol: Option<f64>,
    precision_digits: Option<u32>,
    max_digits: Option<u32>,
    limit: Option<LimitSpec>,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub q: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub mode: Mode,
    pub problem: Option<ProblemSpec>,
    pub initial: DataSelector,
    pub velocity: Option<DataSelector>,
    pub forcing: Option<ForcingSpec>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub time_nodes: usize,
    pub panels: usize,
    pub kernel_tol: f64,
    pub precision_digits: u32,
    pub max_digits: u32,
    pub limit: LimitSpec,
    /// Directory against which relative data paths are resolved.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub precision_digits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Read(String),
    Malformed(String),
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Malformed(m) => write!(f, "malformed config: {m}"),
            ConfigError::Invalid(list) => {
                write!(f, "invalid config ({} problem{}):", list.len(), if list.len() == 1 { "" } else { "s" })?;
                for p in list {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, base, overrides)
}

pub fn parse_config_str(text: &str, base_dir: PathBuf, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    let mut errs = Vec::new();
    let mode = match (overrides.mode, raw.mode.as_deref()) {
        (Some(m), _) => m,
        (None, None) => Mode::FullLine,
        (None, Some(s)) => s.parse().unwrap_or_else(|_| {
            errs.push(format!("mode must be full-line or half-line, got {s:?}"));
            Mode::FullLine
        }),
    };
    let cfg = RunConfig {
        q: raw.q,
        k_min: raw.k_min,
        k_max: raw.k_max,
        mode,
        problem: raw.problem,
        initial: raw.initial.unwrap_or_default(),
        velocity: raw.velocity,
        forcing: raw.forcing,
        t_final: raw.t_final.unwrap_or(DEFAULT_T),
        time_nodes: raw.time_nodes.unwrap_or(DEFAULT_NODES),
        panels: raw.panels.unwrap_or(DEFAULT_PANELS),
        kernel_tol: raw.kernel_tol.unwrap_or(qspectral::special::DEFAULT_TOL),
        precision_digits: overrides
            .precision_digits
            .or(raw.precision_digits)
            .unwrap_or(KernelOptions::default().precision_digits),
        max_digits: raw.max_digits.unwrap_or(KernelOptions::default().max_digits),
        limit: raw.limit.unwrap_or_default(),
        base_dir,
    };
    cfg.validate(&mut errs);
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}

fn positive(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{name} must be positive, got {v}"));
    }
}

impl RunConfig {
    fn validate(&self, errs: &mut Vec<String>) {
        if !(self.q > 0.0 && self.q < 1.0) {
            errs.push(format!("q must satisfy 0 < q < 1, got {}", self.q));
        }
        if self.k_max - self.k_min < 4 {
            errs.push(format!(
                "lattice needs k_max - k_min >= 4, got [{}, {}]",
                self.k_min, self.k_max
            ));
        }
        match self.problem {
            Some(ProblemSpec::Heat { m }) => {
                if !(m > 0.0) {
                    errs.push(format!("heat requires m > 0, got m = {m}"));
                }
            }
            Some(ProblemSpec::Wave { b, m }) | Some(ProblemSpec::ForcedWave { b, m }) => {
                let name = self.problem.map(|p| p.name()).unwrap_or_default();
                if !(b > 0.0) {
                    errs.push(format!("{name} requires b > 0, got b = {b}"));
                }
                if !(m > 0.0) {
                    errs.push(format!("{name} requires m > 0, got m = {m}"));
                }
                if !(b * b < 4.0 * m) {
                    errs.push(format!(
                        "{name} requires b^2 < 4m, got b^2 = {} and 4m = {}",
                        b * b,
                        4.0 * m
                    ));
                }
            }
            None => {}
        }
        positive("T", self.t_final, errs);
        if self.time_nodes < 5 {
            errs.push(format!("time_nodes must be at least 5, got {}", self.time_nodes));
        }
        if self.panels == 0 {
            errs.push("panels must be at least 1".into());
        }
        positive("kernel_tol", self.kernel_tol, errs);
        if self.precision_digits == 0 || self.precision_digits > self.max_digits {
            errs.push(format!(
                "precision_digits must lie in [1, max_digits = {}], got {}",
                self.max_digits, self.precision_digits
            ));
        }
        self.validate_data("initial", &self.initial, errs);
        if let Some(v) = &self.velocity {
            self.validate_data("velocity", v, errs);
        }
        if let Some(f) = &self.forcing {
            self.validate_data("forcing.profile", &f.profile, errs);
            match f.time {
                TimeSpec::ExpDecay { rate } if !rate.is_finite() => errs.push("forcing rate must be finite".into()),
                TimeSpec::Cos { omega } if !omega.is_finite() => errs.push("forcing omega must be finite".into()),
                _ => {}
            }
        }
        let qs = &self.limit.qs;
        if qs.len() < 2 || qs.iter().any(|&q| !(q > 0.0 && q < 1.0)) || qs.windows(2).any(|w| w[1] <= w[0]) {
            errs.push(format!("limit.qs must be at least two increasing values in (0, 1), got {qs:?}"));
        }
        let [lo, hi] = self.limit.window;
        if !(lo > 0.0 && hi > lo) {
            errs.push(format!("limit.window must satisfy 0 < lo < hi, got [{lo}, {hi}]"));
        }
    }

    fn validate_data(&self, name: &str, d: &DataSelector, errs: &mut Vec<String>) {
        let in_range = |k: i64| k >= self.k_min && k <= self.k_max;
        match d {
            DataSelector::GaussianBump { a, center, amplitude } => {
                positive(&format!("{name}.a"), *a, errs);
                if !center.is_finite() || !amplitude.is_finite() {
                    errs.push(format!("{name}: center and amplitude must be finite"));
                }
            }
            DataSelector::Indicator { k, .. } => {
                if !in_range(*k) {
                    errs.push(format!("{name}.k = {k} lies outside [{}, {}]", self.k_min, self.k_max));
                }
            }
            DataSelector::PolynomialWindow { radius, .. } => positive(&format!("{name}.radius"), *radius, errs),
            DataSelector::KernelSample { j, .. } => {
                if !in_range(*j) {
                    errs.push(format!("{name}.j = {j} lies outside [{}, {}]", self.k_min, self.k_max));
                }
            }
            DataSelector::Csv { path } => {
                let p = self.resolve(path);
                if !p.is_file() {
                    errs.push(format!("{name}: data file {} does not exist", p.display()));
                }
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

    pub fn qparam(&self) -> QParam<f64> {
        QParam::new(self.q).expect("validated")
    }

    pub fn spec(&self) -> LatticeSpec<f64> {
        LatticeSpec::new(self.qparam(), self.k_min, self.k_max).expect("validated")
    }

    pub fn kernel_options(&self) -> KernelOptions {
        KernelOptions {
            tol: self.kernel_tol,
            precision_digits: self.precision_digits,
            max_digits: self.max_digits,
        }
    }
}
