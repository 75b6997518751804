//! Scenario configuration, read from TOML.

use serde::{Deserialize, Serialize};

use biascalc::BiasError;
use sde::{CirParams, CklsParams, NoiseSpec};
use spotvol::FourierConfig;

use crate::HarnessError;

/// Variance dynamics of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Cir,
    Ckls { beta: f64 },
}

impl Model {
    pub fn beta(&self) -> f64 {
        match *self {
            Model::Cir => 0.5,
            Model::Ckls { beta } => beta,
        }
    }
}

/// Model parameters in per-year units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub alpha: f64,
    pub theta: f64,
    pub gamma: f64,
    pub nu0: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub mu: f64,
}

impl ParamSet {
    pub fn cir(&self) -> CirParams {
        CirParams { alpha: self.alpha, theta: self.theta, gamma: self.gamma, nu0: self.nu0 }
    }

    pub fn ckls(&self, model: Model) -> CklsParams {
        CklsParams { beta: model.beta(), ..CklsParams::from_cir(self.cir(), self.mu, self.rho) }
    }
}

/// Calendar used to convert seconds and days to years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearLayout {
    pub days: f64,
    pub hours_per_day: f64,
}

impl Default for YearLayout {
    fn default() -> Self {
        Self { days: sde::DAYS_PER_YEAR, hours_per_day: sde::HOURS_PER_DAY }
    }
}

impl YearLayout {
    pub fn seconds_per_year(&self) -> f64 {
        self.days * self.hours_per_day * 3600.0
    }

    pub fn seconds(&self, s: f64) -> f64 {
        s / self.seconds_per_year()
    }

    pub fn day(&self) -> f64 {
        1.0 / self.days
    }

    /// Seconds in one trading day.
    pub fn day_seconds(&self) -> f64 {
        self.hours_per_day * 3600.0
    }
}

/// How the window scale is chosen on each day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum KappaMode {
    /// Every listed scale, each producing its own rows.
    Fixed { kappa: Vec<f64> },
    /// `2ν(τ)^{1−β}/γ` from the simulated variance at the start of the day.
    Oracle,
    /// The same rule with `ν(τ)` and `γ` estimated from the observed prices.
    Feasible {
        #[serde(default)]
        fourier: Option<FourierConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningSpec {
    #[serde(flatten)]
    pub kappa: KappaMode,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_b() -> f64 {
    -0.5
}

fn default_c() -> f64 {
    0.25
}

/// Simulation mesh, observation meshes and estimation grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    #[serde(default = "default_sim_step")]
    pub sim_step_seconds: u64,
    /// Price meshes `δ`, each a multiple of the simulation step.
    pub price_mesh_seconds: Vec<u64>,
    /// Grid steps `Δ` as multiples of the price mesh.
    pub grid_multiples: Vec<usize>,
    /// Days evaluated on every path.
    #[serde(default = "default_eval_days")]
    pub eval_days: usize,
    /// Days simulated before the first evaluated day so that backward windows fit. When
    /// absent it is derived from the largest fixed window, or set to
    /// [`DEFAULT_WARMUP_DAYS`] when the scale is chosen per day.
    #[serde(default)]
    pub warmup_days: Option<usize>,
    #[serde(default = "default_horizon")]
    pub horizon_days: f64,
}

fn default_sim_step() -> u64 {
    1
}

fn default_eval_days() -> usize {
    252
}

/// Warm-up for per-day window scales, which are unknown before simulating.
pub const DEFAULT_WARMUP_DAYS: usize = 8;

fn default_horizon() -> f64 {
    1.0
}

/// A Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    pub model: Model,
    pub params: ParamSet,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub year: YearLayout,
    pub sampling: Sampling,
    pub tuning: TuningSpec,
}

fn default_seed() -> u64 {
    1
}

fn default_paths() -> usize {
    200
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{field}: {msg}"))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_paths == 0 {
            return Err(cfg_err("n_paths", "must be at least 1"));
        }
        if !(self.year.days > 0.0 && self.year.hours_per_day > 0.0 && self.year.hours_per_day <= 24.0) {
            return Err(cfg_err("year", "days and hours_per_day must be positive, hours at most 24"));
        }
        self.params.ckls(self.model).validate().map_err(|e| cfg_err("params", e))?;
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| cfg_err("noise", e))?;
        }
        let s = &self.sampling;
        if s.sim_step_seconds == 0 {
            return Err(cfg_err("sampling.sim_step_seconds", "must be positive"));
        }
        let day = self.year.day_seconds();
        if (day / s.sim_step_seconds as f64).fract() != 0.0 {
            return Err(cfg_err("sampling.sim_step_seconds", "must divide the trading day"));
        }
        if s.price_mesh_seconds.is_empty() {
            return Err(cfg_err("sampling.price_mesh_seconds", "needs at least one mesh"));
        }
        for &m in &s.price_mesh_seconds {
            if m == 0 || m % s.sim_step_seconds != 0 {
                return Err(cfg_err("sampling.price_mesh_seconds", format!("{m} is not a positive multiple of the simulation step")));
            }
            if (day / m as f64).fract() != 0.0 {
                return Err(cfg_err("sampling.price_mesh_seconds", format!("{m} does not divide the trading day")));
            }
        }
        if s.grid_multiples.is_empty() || s.grid_multiples.contains(&0) {
            return Err(cfg_err("sampling.grid_multiples", "must be a nonempty list of positive integers"));
        }
        if s.eval_days == 0 {
            return Err(cfg_err("sampling.eval_days", "must be at least 1"));
        }
        if !(s.horizon_days > 0.0) {
            return Err(cfg_err("sampling.horizon_days", "must be positive"));
        }
        for &m in &s.price_mesh_seconds {
            for &g in &s.grid_multiples {
                if (m as usize * g) as f64 > s.horizon_days * day * (1.0 + 1e-12) {
                    return Err(cfg_err("sampling.grid_multiples", format!("grid step {g} x {m}s exceeds the horizon")));
                }
            }
        }
        let t = &self.tuning;
        if !(t.b > -1.0 && t.b <= 0.0) {
            return Err(cfg_err("tuning.b", "must lie in (-1, 0]"));
        }
        if !(t.c > 0.0 && t.c < 1.0) {
            return Err(cfg_err("tuning.c", "must lie in (0, 1)"));
        }
        match &t.kappa {
            KappaMode::Fixed { kappa } if kappa.is_empty() || kappa.iter().any(|k| !(*k > 0.0)) => {
                return Err(cfg_err("tuning.kappa", "needs positive values"));
            }
            KappaMode::Oracle | KappaMode::Feasible { .. } if t.b != -0.5 => {
                // The bias-optimal scale cancels the leading term only at b = -1/2.
                return Err(cfg_err("tuning.b", "oracle and feasible scales assume b = -1/2"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Simulation step in years.
    pub fn sim_dt(&self) -> f64 {
        self.year.seconds(self.sampling.sim_step_seconds as f64)
    }

    /// Simulation steps in one trading day.
    pub fn steps_per_day(&self) -> usize {
        (self.year.day_seconds() / self.sampling.sim_step_seconds as f64).round() as usize
    }

    /// Start of evaluated day `d` (years).
    pub fn day_start(&self, d: usize) -> f64 {
        (self.warmup_days() + d) as f64 * self.year.day()
    }

    /// Configured warm-up, or one day more than the longest fixed window.
    pub fn warmup_days(&self) -> usize {
        if let Some(w) = self.sampling.warmup_days {
            return w;
        }
        match &self.tuning.kappa {
            KappaMode::Fixed { kappa } => {
                let longest = self
                    .sampling
                    .price_mesh_seconds
                    .iter()
                    .flat_map(|&m| {
                        let delta = self.year.seconds(m as f64);
                        kappa.iter().map(move |&k| estimator::ceil_count(k * delta.powf(self.tuning.b)) as f64 * delta)
                    })
                    .fold(0.0, f64::max);
                (longest / self.year.day()).ceil() as usize + 1
            }
            _ => DEFAULT_WARMUP_DAYS,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.sampling.horizon_days * self.year.day()
    }
}

impl From<BiasError> for HarnessError {
    fn from(e: BiasError) -> Self {
        HarnessError::Config(e.to_string())
    }
}
