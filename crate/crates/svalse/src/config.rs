//! TOML run configuration.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//!
//! [geometry]
//! m_sensors = 15
//! spacing_m = 3.75
//! sound_speed = 1500.0
//! freq_hz = 200.0
//!
//! [scenario]
//! preset = "fig4"        # or a list of [[scenario.sources]]
//! t_max = 50
//! snr_db = 20.0
//!
//! [estimator]            # every key optional
//! p_act = 0.10
//!
//! [metrics]
//! c = 10.0
//! c_prime = 10.0
//!
//! [benchmark]
//! snr_db = [0.0, 10.0, 20.0, 30.0, 40.0]
//! n_runs = 20
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use svalse_core::metrics::MetricConfig;
use svalse_core::{ArrayGeometry, EstimatorConfig};

use crate::error::{CliError, Result};
use crate::simkit::{fig4_sources, fig6_sources, scenario1_sources, SourceSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub m_sensors: usize,
    pub spacing_m: f64,
    pub sound_speed: f64,
    pub freq_hz: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { m_sensors: 15, spacing_m: 3.75, sound_speed: 1500.0, freq_hz: 200.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig4,
    Fig6,
    Scenario1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceSpec>,
    pub t_max: usize,
    /// SNR used by `simulate`.
    pub snr_db: f64,
    /// Snapshot file read by `estimate` when no input is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { preset: Some(Preset::Fig4), sources: Vec::new(), t_max: 50, snr_db: 20.0, snapshots: None }
    }
}

/// Estimator keys; anything left out takes the library default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_act: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_deact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prune_d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_init_db: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub c: f64,
    pub c_prime: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        let d = MetricConfig::default();
        Self { c: d.c, c_prime: d.c_prime }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub snr_db: Vec<f64>,
    pub n_runs: usize,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self { snr_db: vec![0.0, 10.0, 20.0, 30.0, 40.0], n_runs: 20 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Canned configuration for a built-in scenario.
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = RunConfig {
            seed: default_seed(),
            output_dir: default_output_dir(),
            geometry: GeometryConfig::default(),
            scenario: ScenarioConfig { preset: Some(preset), ..ScenarioConfig::default() },
            estimator: EstimatorSection::default(),
            metrics: MetricsSection::default(),
            benchmark: BenchmarkSection::default(),
        };
        match preset {
            Preset::Fig4 | Preset::Fig6 => {
                cfg.benchmark = BenchmarkSection { snr_db: vec![20.0], n_runs: 10 };
            }
            Preset::Scenario1 => {}
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.array()?;
        self.estimator_config()?;
        self.metric_config()?;
        if self.scenario.t_max == 0 {
            return Err(CliError::config("scenario.t_max must be >= 1"));
        }
        if !self.scenario.snr_db.is_finite() {
            return Err(CliError::config("scenario.snr_db must be finite"));
        }
        if self.scenario.preset.is_some() && !self.scenario.sources.is_empty() {
            return Err(CliError::config("scenario: give either preset or sources, not both"));
        }
        for (i, s) in self.scenario.sources.iter().enumerate() {
            s.validate().map_err(|e| match e {
                CliError::Config(msg) => CliError::config(format!("scenario.sources[{i}]: {msg}")),
                other => other,
            })?;
        }
        if self.benchmark.n_runs == 0 {
            return Err(CliError::config("benchmark.n_runs must be >= 1"));
        }
        if self.benchmark.snr_db.is_empty() {
            return Err(CliError::config("benchmark.snr_db must not be empty"));
        }
        if self.benchmark.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(CliError::config("benchmark.snr_db entries must be finite"));
        }
        Ok(())
    }

    pub fn array(&self) -> Result<ArrayGeometry> {
        let g = &self.geometry;
        ArrayGeometry::with_frequency(g.m_sensors, g.spacing_m, g.sound_speed, g.freq_hz)
            .map_err(|e| CliError::config(format!("geometry: {e}")))
    }

    pub fn estimator_config(&self) -> Result<EstimatorConfig> {
        let e = &self.estimator;
        let d = EstimatorConfig::default();
        let cfg = EstimatorConfig {
            l_components: e.l_components.unwrap_or(self.geometry.m_sensors),
            p_act: e.p_act.unwrap_or(d.p_act),
            p_deact: e.p_deact.unwrap_or(d.p_deact),
            kappa_r: e.kappa_r.unwrap_or(d.kappa_r),
            prune_d: e.prune_d.unwrap_or(d.prune_d),
            rho0: e.rho0.unwrap_or(d.rho0),
            max_iter: e.max_iter.unwrap_or(d.max_iter),
            theta_tol: e.theta_tol.unwrap_or(d.theta_tol),
            snr_init_db: e.snr_init_db.unwrap_or(d.snr_init_db),
        };
        cfg.validate().map_err(|e| CliError::config(format!("estimator: {e}")))?;
        Ok(cfg)
    }

    pub fn metric_config(&self) -> Result<MetricConfig> {
        MetricConfig::new(self.metrics.c, self.metrics.c_prime).map_err(|e| CliError::config(format!("metrics: {e}")))
    }

    /// Source list of the scenario, with presets expanded for `t_max`.
    pub fn sources(&self) -> Result<Vec<SourceSpec>> {
        let t_max = self.scenario.t_max;
        let specs = match self.scenario.preset {
            Some(Preset::Fig4) => fig4_sources(t_max),
            Some(Preset::Fig6) => fig6_sources(t_max),
            Some(Preset::Scenario1) => scenario1_sources(t_max),
            None => self.scenario.sources.clone(),
        };
        if specs.is_empty() {
            return Err(CliError::config("scenario has no sources"));
        }
        Ok(specs)
    }
}
