//! Experiment configuration in TOML, with `key=value` overrides.
//!
//! ```toml
//! scenario = "decay"
//! output_dir = "out/decay"
//! sample_stride = 10
//!
//! [grid]
//! dim = 2
//! n = 512
//! length = 200.0
//!
//! [params]
//! nu = 0.1
//! beta = 0.5
//! alpha = 0.5
//! dt = 0.1
//! t_end = 90.0
//!
//! [datum]
//! kind = "stream-bump"
//! profile = "poisson"
//! width = 0.1
//!
//! [fit]
//! t_lo = 10.0
//! t_hi = 80.0
//! ```
//!
//! Unknown keys anywhere are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datum::DatumSpec;
use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::integrator::{Model, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Simulate,
    Decay,
    GradientDecay,
    ScaledFamily,
    AlphaSweep,
    FilterCheck,
    KernelCheck,
    Selftest,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Decay => "decay",
            Scenario::GradientDecay => "gradient-decay",
            Scenario::ScaledFamily => "scaled-family",
            Scenario::AlphaSweep => "alpha-sweep",
            Scenario::FilterCheck => "filter-check",
            Scenario::KernelCheck => "kernel-check",
            Scenario::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.dim, self.n, self.length)
    }
}

/// Fit window and pass bands for the decay scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    /// Allowed `|fitted - predicted|` for the energy exponent.
    #[serde(default = "default_energy_band")]
    pub energy_band: f64,
    /// Allowed `|fitted - predicted|` for gradient exponents.
    #[serde(default = "default_gradient_band")]
    pub gradient_band: f64,
    #[serde(default = "default_energy_r2")]
    pub energy_r2: f64,
    #[serde(default = "default_gradient_r2")]
    pub gradient_r2: f64,
    /// Highest derivative order `m` whose `|grad^m v|^2` is fitted.
    #[serde(default = "default_gradient_order")]
    pub gradient_order: u32,
}

fn default_energy_band() -> f64 {
    0.5
}
fn default_gradient_band() -> f64 {
    1.0
}
fn default_energy_r2() -> f64 {
    crate::diagnostics::ALGEBRAIC_R2
}
fn default_gradient_r2() -> f64 {
    0.95
}
fn default_gradient_order() -> u32 {
    2
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            t_lo: None,
            t_hi: None,
            energy_band: default_energy_band(),
            gradient_band: default_gradient_band(),
            energy_r2: default_energy_r2(),
            gradient_r2: default_gradient_r2(),
            gradient_order: default_gradient_order(),
        }
    }
}

/// Exponents of the filter-limit experiment. `q` follows from `l` through
/// `s = l n / (n - l beta)`, `q = 2 s / (s - 2)` unless given explicitly; the
/// rate exponent `gamma` uses `p = l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    #[serde(default = "default_l")]
    pub l_exponent: f64,
    pub q_exponent: Option<f64>,
    /// Smallest acceptable fitted order; the guaranteed `beta/2 - gamma` is always enforced too.
    #[serde(default = "default_min_order")]
    pub min_order: f64,
}

fn default_l() -> f64 {
    2.0
}
fn default_min_order() -> f64 {
    1.5
}

impl SweepConfig {
    /// `(s, q)` for a `dim`-dimensional run of order `beta`.
    pub fn exponents(&self, dim: usize, beta: f64) -> Result<(f64, f64)> {
        let n = dim as f64;
        let l = self.l_exponent;
        if 3.0 * beta <= 1.0 || l <= n / (3.0 * beta - 1.0) {
            return Err(Error::Config(format!(
                "l_exponent = {l} must exceed n/(3 beta - 1) = {}",
                n / (3.0 * beta - 1.0)
            )));
        }
        if n - l * beta <= 0.0 {
            return Err(Error::Config(format!("l_exponent = {l} must be below n/beta = {}", n / beta)));
        }
        let s = l * n / (n - l * beta);
        if s <= 2.0 {
            return Err(Error::Config(format!("derived s = {s} must exceed 2")));
        }
        Ok((s, self.q_exponent.unwrap_or(2.0 * s / (s - 2.0))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Window over which the lower bound `E(t) >= |u0|^2 - C eps^2 t` is checked.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Give up on a half-life beyond this time.
    #[serde(default = "default_half_life_cap")]
    pub half_life_cap: f64,
    /// Largest tolerated `resolution_defect` of a member datum.
    #[serde(default = "default_resolution_tolerance")]
    pub resolution_tolerance: f64,
}

fn default_epsilons() -> Vec<f64> {
    vec![1.0, 0.5, 0.25]
}
fn default_horizon() -> f64 {
    20.0
}
fn default_half_life_cap() -> f64 {
    400.0
}
fn default_resolution_tolerance() -> f64 {
    1e-8
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            epsilons: default_epsilons(),
            horizon: default_horizon(),
            half_life_cap: default_half_life_cap(),
            resolution_tolerance: default_resolution_tolerance(),
        }
    }
}

/// Options of the filter- and kernel-check scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default = "default_check_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_gammas")]
    pub gamma0: Vec<f64>,
}

fn default_check_alphas() -> Vec<f64> {
    vec![0.1, 1.0]
}
fn default_samples() -> usize {
    100
}
fn default_gammas() -> Vec<f64> {
    vec![1.0, 1.5, 2.0]
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { alphas: default_check_alphas(), samples: default_samples(), gamma0: default_gammas() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_model")]
    pub model: Model,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_stride")]
    pub sample_stride: u64,
    pub grid: GridConfig,
    pub params: SolverParams,
    pub datum: DatumSpec,
    /// Checkpoint to resume from (simulate only).
    pub resume_from: Option<PathBuf>,
    #[serde(default)]
    pub fit: FitConfig,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub check: CheckConfig,
}

fn default_model() -> Model {
    Model::CamassaHolm
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_stride() -> u64 {
    10
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: ExperimentConfig =
            toml::Value::Table(value).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Scenario-specific requirements beyond the schema.
    pub fn validate(&self) -> Result<Vec<String>> {
        let grid = self.grid.build().map_err(|e| Error::Config(e.to_string()))?;
        let warnings = self.params.validate(grid.dim()).map_err(|e| Error::Config(e.to_string()))?;
        if self.sample_stride == 0 {
            return Err(Error::Config("sample_stride must be at least 1".into()));
        }
        match self.scenario {
            Scenario::AlphaSweep => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| Error::Config("alpha-sweep needs a [sweep] section".into()))?;
                if sweep.alphas.len() < 2 {
                    return Err(Error::Config("alpha-sweep needs at least two alphas".into()));
                }
                if sweep.alphas.iter().any(|&a| !(a > 0.0)) || sweep.alphas.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::Config("alphas must be positive and strictly decreasing".into()));
                }
                sweep.exponents(grid.dim(), self.params.beta)?;
            }
            Scenario::ScaledFamily => {
                let eps = &self.family.epsilons;
                if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::Config("epsilons must be positive and strictly decreasing".into()));
                }
                if !matches!(self.datum, DatumSpec::Scaled { .. }) {
                    return Err(Error::Config("scaled-family needs a datum of kind \"scaled\"".into()));
                }
                if !(self.family.horizon > 0.0 && self.family.half_life_cap >= self.family.horizon) {
                    return Err(Error::Config("need 0 < horizon <= half_life_cap".into()));
                }
            }
            Scenario::Decay | Scenario::GradientDecay => {
                if !(self.params.t_end > 0.0) {
                    return Err(Error::Config("decay runs need t_end > 0".into()));
                }
            }
            Scenario::FilterCheck => {
                if self.check.alphas.iter().any(|&a| !(a >= 0.0)) || self.check.samples == 0 {
                    return Err(Error::Config("filter-check needs nonnegative alphas and samples >= 1".into()));
                }
            }
            Scenario::KernelCheck => {
                if self.check.gamma0.iter().any(|&g| !(g > 0.0 && g <= 2.0)) {
                    return Err(Error::Config("kernel orders must lie in (0, 2]".into()));
                }
            }
            Scenario::Simulate | Scenario::Selftest => {}
        }
        Ok(warnings)
    }
}

/// Set `a.b.c = value` in a TOML table; the value is parsed as TOML and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
