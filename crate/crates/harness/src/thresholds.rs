//! Threshold meshes below which bias-optimal windows stop overlapping.

use serde::{Deserialize, Serialize};

use biascalc::{lambda_star, no_overlap_threshold, overlap_threshold_delta};

use crate::config::{ParamSet, YearLayout};
use crate::HarnessError;

/// Parameter sets and grids for the threshold curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub sets: Vec<NamedSet>,
    #[serde(default)]
    pub year: YearLayout,
    /// Start of the estimation horizon (days).
    #[serde(default)]
    pub tau_days: f64,
    #[serde(default = "one")]
    pub horizon_days: f64,
    /// Number of grid scales between zero and the largest admissible one.
    #[serde(default = "default_points")]
    pub n_points: usize,
    /// Grid scales at which the overlap threshold of the optimal window is also reported.
    #[serde(default)]
    pub overlap_lambdas: Vec<f64>,
    #[serde(default = "quarter")]
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    #[serde(flatten)]
    pub params: ParamSet,
}

fn one() -> f64 {
    1.0
}

fn default_points() -> usize {
    50
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// Root of the no-overlap cancelling equation on the grid-scale curve.
    NoOverlap,
    /// Mesh below which the optimal window of the mean variance is shorter than the grid step.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub set: String,
    pub kind: ThresholdKind,
    pub lambda: f64,
    /// Largest admissible grid scale of the set.
    pub lambda_star: f64,
    pub kappa_tilde: f64,
    pub delta_star_years: f64,
    pub delta_star_seconds: f64,
}

impl ThresholdConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sets.is_empty() {
            return Err(HarnessError::Config("sets: needs at least one parameter set".into()));
        }
        for s in &self.sets {
            s.params.cir().validate().map_err(|e| HarnessError::Config(format!("sets.{}: {e}", s.name)))?;
        }
        if self.n_points < 2 {
            return Err(HarnessError::Config("n_points: must be at least 2".into()));
        }
        if !(self.horizon_days > 0.0 && self.tau_days >= 0.0) {
            return Err(HarnessError::Config("horizon_days must be positive and tau_days nonnegative".into()));
        }
        if !(self.c > 0.0 && self.c < 0.5) {
            return Err(HarnessError::Config("c: must lie in (0, 1/2)".into()));
        }
        if self.overlap_lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(HarnessError::Config("overlap_lambdas: must be positive".into()));
        }
        Ok(())
    }
}

/// `δ*(λ)` on an even grid of `(0, λ*]` for each set, followed by the overlap thresholds.
pub fn threshold_curves(cfg: &ThresholdConfig) -> Result<Vec<ThresholdRow>, HarnessError> {
    cfg.validate()?;
    let tau = cfg.tau_days * cfg.year.day();
    let h = cfg.horizon_days * cfg.year.day();
    let spy = cfg.year.seconds_per_year();
    let mut rows = Vec::new();
    for set in &cfg.sets {
        let p = set.params.cir();
        let lmax = lambda_star(&p, tau, h)?.unwrap_or(f64::NAN);
        for i in (1..=cfg.n_points).filter(|_| lmax.is_finite()) {
            let lambda = lmax * i as f64 / cfg.n_points as f64;
            let t = no_overlap_threshold(&p, tau, h, lambda)?;
            let d = t.delta_star.unwrap_or(f64::NAN);
            rows.push(ThresholdRow {
                set: set.name.clone(),
                kind: ThresholdKind::NoOverlap,
                lambda,
                lambda_star: lmax,
                kappa_tilde: t.kappa_tilde.unwrap_or(f64::NAN),
                delta_star_years: d,
                delta_star_seconds: d * spy,
            });
        }
        for &lambda in &cfg.overlap_lambdas {
            let nu = biascalc::e_nu_tau(&p, tau);
            let d = overlap_threshold_delta(nu, p.gamma, lambda, cfg.c)?;
            rows.push(ThresholdRow {
                set: set.name.clone(),
                kind: ThresholdKind::Overlap,
                lambda,
                lambda_star: lmax,
                kappa_tilde: biascalc::kappa_star(nu, p.gamma)?,
                delta_star_years: d,
                delta_star_seconds: d * spy,
            });
        }
    }
    Ok(rows)
}
