//! TOML run configuration.
//!
//! ```toml
//! [scenario]
//! n_rx = 8
//! n_tx = 4
//! rician_k_db = 7.0        # -inf for Rayleigh
//! snr_db = 10.0            # p/N0
//! gamma_th_db = 6.0        # gamma_th/N0
//! kappa = 0.1              # kappa_t = kappa_r unless given separately
//! sigma_est = 0.0
//!
//! [[variant]]
//! name = "impaired"
//! sigma_est = 0.05
//!
//! [sweep]
//! axis = "rician_k_db"
//! start = 0.0
//! stop = 14.0
//! step = 1.0
//! stages = "all"           # or [1, 2]
//! outputs = ["outage", "floor"]
//!
//! [sweep.monte_carlo]
//! trials = 100000
//! seed = 1
//!
//! [convergence]
//! rician_k_db = 6.0
//! snr_db = 10.0
//! dims = [[4, 4], [8, 4]]
//! ```

use serde::Deserialize;
use zfsic_core::channel::{db_to_linear, k_from_db, ConfigError, SystemConfig};
use zfsic_core::stage::{Detector, SnrModel, StageIndex};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    /// Each table holds `name` plus any [`ScenarioSpec`] keys to override.
    #[serde(default, rename = "variant")]
    pub variants: Vec<toml::Table>,
    pub sweep: Option<SweepSpec>,
    pub convergence: Option<ConvergenceSpec>,
}

/// Scenario keys; all optional so variants can override selectively.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n_rx: Option<usize>,
    pub n_tx: Option<usize>,
    pub rician_k_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub gamma_th_db: Option<f64>,
    pub sigma_est: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_t: Option<f64>,
    pub kappa_r: Option<f64>,
    pub distances: Option<Vec<f64>>,
    pub pathloss_exps: Option<Vec<f64>>,
    pub noise_power: Option<f64>,
    pub arrival_angle_deg: Option<f64>,
    pub antenna_spacing_wavelengths: Option<f64>,
    pub detector: Option<DetectorName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorName {
    Zf,
    ZfSic,
}

impl From<DetectorName> for Detector {
    fn from(d: DetectorName) -> Self {
        match d {
            DetectorName::Zf => Detector::Zf,
            DetectorName::ZfSic => Detector::ZfSic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    RicianKDb,
    GammaThDb,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::RicianKDb => "rician_k_db",
            Axis::GammaThDb => "gamma_th_db",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Outage,
    Capacity,
    SumCapacity,
    Floor,
}

impl Output {
    pub fn file_stem(self) -> &'static str {
        match self {
            Output::Outage => "outage",
            Output::Capacity => "capacity",
            Output::SumCapacity => "sum_capacity",
            Output::Floor => "floor",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StageSelection {
    Named(String),
    List(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    #[serde(default = "default_stages")]
    pub stages: StageSelection,
    pub outputs: Vec<Output>,
    pub monte_carlo: Option<MonteCarloSpec>,
}

fn default_stages() -> StageSelection {
    StageSelection::Named("all".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrModelName {
    Statistic,
    FullSystem,
}

impl From<SnrModelName> for SnrModel {
    fn from(s: SnrModelName) -> Self {
        match s {
            SnrModelName::Statistic => SnrModel::Statistic,
            SnrModelName::FullSystem => SnrModel::FullSystem,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_snr_model")]
    pub snr_model: SnrModelName,
}

fn default_snr_model() -> SnrModelName {
    SnrModelName::FullSystem
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub rician_k_db: f64,
    pub snr_db: f64,
    #[serde(default = "default_dims")]
    pub dims: Vec<[usize; 2]>,
}

/// The (N, M) grid of the published terms table.
pub const TABLE_DIMS: [[usize; 2]; 6] = [[4, 4], [8, 4], [8, 8], [16, 8], [64, 8], [128, 8]];

fn default_dims() -> Vec<[usize; 2]> {
    TABLE_DIMS.to_vec()
}

/// A fully resolved scenario (base merged with one variant).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: SystemConfig,
    pub rician_k_db: f64,
    /// γ_th/N₀ in dB, when given.
    pub gamma_th_db: Option<f64>,
    pub detector: Detector,
}

impl Scenario {
    /// Linear SNR threshold γ_th.
    pub fn gamma_th(&self) -> Option<f64> {
        self.gamma_th_db.map(|db| self.config.noise_power * db_to_linear(db))
    }

    /// Copy with one sweep axis set to `value`.
    pub fn at(&self, axis: Axis, value: f64) -> Scenario {
        let mut s = self.clone();
        match axis {
            Axis::SnrDb => s.config.snr_db = value,
            Axis::RicianKDb => {
                s.rician_k_db = value;
                s.config.rician_k = k_from_db(value);
            }
            Axis::GammaThDb => s.gamma_th_db = Some(value),
        }
        s
    }

    pub fn stages(&self, selection: &StageSelection) -> Result<Vec<StageIndex>, CliError> {
        let m = self.config.n_tx;
        match selection {
            StageSelection::Named(s) if s == "all" => Ok(StageIndex::all(m).collect()),
            StageSelection::Named(s) => Err(CliError::Config(format!("sweep.stages: expected \"all\" or a list, got \"{s}\""))),
            StageSelection::List(list) => list
                .iter()
                .map(|&i| StageIndex::new(i, m).map_err(|e| CliError::Config(format!("sweep.stages: {e} in scenario \"{}\"", self.name))))
                .collect(),
        }
    }
}

impl ScenarioSpec {
    fn apply(&mut self, over: ScenarioSpec) {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(
            n_rx, n_tx, rician_k_db, snr_db, gamma_th_db, sigma_est, kappa, kappa_t, kappa_r, distances,
            pathloss_exps, noise_power, arrival_angle_deg, antenna_spacing_wavelengths, detector
        );
    }
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

impl RunConfig {
    /// Base scenario merged with each variant, or the base alone as "base".
    /// `free_axis` names a key that may be missing because a sweep sets it.
    pub fn scenarios(&self, free_axis: Option<Axis>) -> Result<Vec<Scenario>, CliError> {
        if self.variants.is_empty() {
            return Ok(vec![resolve("base", &self.scenario, "scenario", free_axis)?]);
        }
        let mut names = std::collections::BTreeSet::new();
        self.variants
            .iter()
            .enumerate()
            .map(|(i, table)| {
                let section = format!("variant[{i}]");
                let mut table = table.clone();
                let name = match table.remove("name") {
                    Some(toml::Value::String(n)) => n,
                    _ => return Err(CliError::Config(format!("{section}.name is required (string)"))),
                };
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(CliError::Config(format!("{section}.name must be a non-empty [A-Za-z0-9_-] string")));
                }
                if !names.insert(name.clone()) {
                    return Err(CliError::Config(format!("{section}.name \"{name}\" is duplicated")));
                }
                let over: ScenarioSpec = table.try_into().map_err(|e| CliError::Config(format!("{section}: {e}")))?;
                let mut spec = self.scenario.clone();
                spec.apply(over);
                resolve(&name, &spec, &section, free_axis)
            })
            .collect()
    }
}

fn resolve(name: &str, s: &ScenarioSpec, section: &str, free_axis: Option<Axis>) -> Result<Scenario, CliError> {
    let missing = |key: &str| CliError::Config(format!("{section}.{key} is required"));
    let free = |a: Axis| free_axis == Some(a);
    let n_rx = s.n_rx.ok_or_else(|| missing("n_rx"))?;
    let n_tx = s.n_tx.ok_or_else(|| missing("n_tx"))?;
    let rician_k_db = match s.rician_k_db {
        Some(v) => v,
        None if free(Axis::RicianKDb) => f64::NEG_INFINITY,
        None => return Err(missing("rician_k_db")),
    };
    let snr_db = match s.snr_db {
        Some(v) => v,
        None if free(Axis::SnrDb) => 0.0,
        None => return Err(missing("snr_db")),
    };
    let kappa = s.kappa.unwrap_or(0.0);
    let mut config = SystemConfig::symmetric(n_rx, n_tx).with_snr_db(snr_db);
    config.rician_k = k_from_db(rician_k_db);
    config.sigma_est = s.sigma_est.unwrap_or(0.0);
    config.kappa_t = s.kappa_t.unwrap_or(kappa);
    config.kappa_r = s.kappa_r.unwrap_or(kappa);
    if let Some(d) = &s.distances {
        config.distances = d.clone();
    }
    if let Some(a) = &s.pathloss_exps {
        config.pathloss_exps = a.clone();
    }
    if let Some(v) = s.noise_power {
        config.noise_power = v;
    }
    if let Some(v) = s.arrival_angle_deg {
        config.arrival_angle_deg = v;
    }
    if let Some(v) = s.antenna_spacing_wavelengths {
        config.antenna_spacing_wavelengths = v;
    }
    if rician_k_db.is_nan() || rician_k_db == f64::INFINITY {
        return Err(CliError::Config(format!("{section}.rician_k_db = {rician_k_db} is not a valid K-factor")));
    }
    config.validate().map_err(|e| config_error(section, e))?;
    Ok(Scenario {
        name: name.to_string(),
        config,
        rician_k_db,
        gamma_th_db: s.gamma_th_db,
        detector: s.detector.unwrap_or(DetectorName::ZfSic).into(),
    })
}

fn config_error(section: &str, e: ConfigError) -> CliError {
    let key = match &e {
        ConfigError::Dimensions { .. } => "n_rx/n_tx",
        ConfigError::Length { field, .. } | ConfigError::Range { field, .. } => field,
    };
    CliError::Config(format!("{section}.{key}: {e}"))
}

/// Grid start, start+step, … up to stop (inclusive, with a rounding guard).
pub fn grid(spec: &SweepSpec) -> Result<Vec<f64>, CliError> {
    if !(spec.start.is_finite() && spec.stop.is_finite() && spec.start <= spec.stop) {
        return Err(CliError::Config("sweep.start/sweep.stop: need finite start ≤ stop".into()));
    }
    if !(spec.step > 0.0 && spec.step.is_finite()) {
        return Err(CliError::Config("sweep.step must be positive".into()));
    }
    let n = ((spec.stop - spec.start) / spec.step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(CliError::Config("sweep.step: more than 100000 grid points".into()));
    }
    Ok((0..n).map(|k| spec.start + k as f64 * spec.step).collect())
}
