//! Monte Carlo bias of the PSRV against the simulated quadratic variation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use estimator::{psrv, true_qv, EstimatorError, Tuning};
use sde::{add_noise, simulate_ckls, subsample, LogPricePath, NoiseSpec, PathGrid, StreamSeed, VolPath};
use spotvol::{fourier_spot_vol, indirect_inference, kappa_from, nearest, FourierConfig};

use crate::config::{KappaMode, ScenarioConfig};
use crate::HarnessError;

/// One cell of the experiment: a price mesh, a grid step and, for fixed scales, a `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub mesh_seconds: u64,
    pub grid_multiple: usize,
    pub kappa: Option<f64>,
}

/// Cells in output order: mesh, then scale, then grid step.
pub fn cells(cfg: &ScenarioConfig) -> Vec<Cell> {
    let kappas: Vec<Option<f64>> = match &cfg.tuning.kappa {
        KappaMode::Fixed { kappa } => kappa.iter().map(|&k| Some(k)).collect(),
        _ => vec![None],
    };
    let mut out = Vec::new();
    for &mesh_seconds in &cfg.sampling.price_mesh_seconds {
        for &kappa in &kappas {
            for &grid_multiple in &cfg.sampling.grid_multiples {
                out.push(Cell { mesh_seconds, grid_multiple, kappa });
            }
        }
    }
    out
}

/// PSRV and realized quadratic variation of one path on one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub cell: usize,
    pub day: usize,
    pub kappa: f64,
    pub k_n: usize,
    /// `None` when the window does not fit in the simulated data.
    pub psrv: Option<f64>,
    pub qv: f64,
}

/// Aggregated row of a bias table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub set: String,
    pub beta: f64,
    pub delta_seconds: u64,
    pub grid_multiple: usize,
    pub big_delta_seconds: u64,
    /// Grid scale implied by the step, `Δ/δ^c` (years).
    pub lambda: f64,
    /// Window scale for fixed-scale runs.
    pub kappa: Option<f64>,
    pub mean_rel_bias: f64,
    pub std_error: f64,
    /// `Σ(PSRV − QV)/ΣQV` over all used days.
    pub pooled_rel_bias: f64,
    pub mean_w_minutes: f64,
    pub n_paths: usize,
    pub days_used: usize,
    pub days_skipped: usize,
    /// Share of skipped days, in percent.
    pub skipped_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTable {
    pub rows: Vec<BiasRow>,
}

/// Simulated variance, noise-free log price and observed log price of one path.
pub struct SimulatedPath {
    pub vol: VolPath,
    pub clean: LogPricePath,
    pub observed: LogPricePath,
}

/// Simulates path `index`: warm-up days, evaluated days and any horizon overhang.
pub fn simulate_path(cfg: &ScenarioConfig, index: usize) -> Result<SimulatedPath, HarnessError> {
    let extra = (cfg.sampling.horizon_days - 1.0).max(0.0).ceil() as usize;
    let days = cfg.warmup_days() + cfg.sampling.eval_days + extra;
    let grid = PathGrid::from_zero(cfg.sim_dt(), days * cfg.steps_per_day())?;
    let seed = StreamSeed::new(cfg.seed, index as u64);
    let (vol, clean) = simulate_ckls(&cfg.params.ckls(cfg.model), &grid, seed)?;
    let observed = match cfg.noise {
        None => clean.clone(),
        Some(spec) => add_noise(&clean, &resolve_noise(cfg, &clean, spec)?, seed)?,
    };
    Ok(SimulatedPath { vol, clean, observed })
}

/// Noise moments for `spec`, with a ratio measured against returns over one second of the
/// configured year.
fn resolve_noise(cfg: &ScenarioConfig, clean: &LogPricePath, spec: NoiseSpec) -> Result<NoiseSpec, HarnessError> {
    let NoiseSpec::Ratio { zeta } = spec else { return Ok(spec) };
    let m = sde::resolve_noise(clean, &NoiseSpec::Ratio { zeta })?;
    // The sde calibration rescales with its own year; restate it for this layout.
    let rescale = sde::SECONDS_PER_YEAR / cfg.year.seconds_per_year();
    let v = m.v_eta * rescale;
    Ok(NoiseSpec::Moments { v_eta: v, q_eta: 3.0 * v * v })
}

/// Per-day records of one path for every cell.
pub fn path_days(cfg: &ScenarioConfig, index: usize) -> Result<Vec<DayRecord>, HarnessError> {
    let sim = simulate_path(cfg, index)?;
    days_for_path(cfg, &sim)
}

pub fn days_for_path(cfg: &ScenarioConfig, sim: &SimulatedPath) -> Result<Vec<DayRecord>, HarnessError> {
    let h = cfg.horizon();
    let beta = cfg.model.beta();
    let (b, c) = (cfg.tuning.b, cfg.tuning.c);
    let mut out = Vec::new();
    for (ci, cell) in cells(cfg).iter().enumerate() {
        let stride = (cell.mesh_seconds / cfg.sampling.sim_step_seconds) as usize;
        let obs = subsample(&sim.observed, stride)?;
        let delta = obs.grid.dt;
        let feasible = match &cfg.tuning.kappa {
            KappaMode::Feasible { fourier } => {
                let days = obs.values.len().saturating_sub(1) * cell.mesh_seconds as usize / cfg.year.day_seconds() as usize;
                Some(feasible_inputs(&obs, fourier.as_ref(), beta, days)?)
            }
            _ => None,
        };
        for day in 0..cfg.sampling.eval_days {
            let tau = cfg.day_start(day);
            let kappa = match (&cfg.tuning.kappa, &feasible) {
                (KappaMode::Fixed { .. }, _) => cell.kappa.expect("fixed cells carry a scale"),
                (KappaMode::Oracle, _) => {
                    let nu = sim.vol.values[sim.vol.grid.floor_index(tau).expect("day start lies on the path")];
                    oracle_kappa(nu, cfg.params.gamma, beta)?
                }
                (KappaMode::Feasible { .. }, Some((vhat, gamma_hat))) => {
                    kappa_from(nearest(vhat, tau).max(spotvol::VARIANCE_FLOOR), *gamma_hat, beta)
                        .map_err(|e| HarnessError::Data(e.to_string()))?
                }
                (KappaMode::Feasible { .. }, None) => unreachable!(),
            };
            let tuning = Tuning {
                delta_n: delta,
                b,
                c,
                kappa,
                lambda: cell.grid_multiple as f64 * delta.powf(1.0 - c),
                h,
                tau,
            };
            let qv = true_qv(&sim.vol, tau, tuning.effective_horizon())?;
            let value = match psrv(&obs, &tuning) {
                Ok(r) => Some(r.value),
                Err(EstimatorError::Coverage { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            out.push(DayRecord { cell: ci, day, kappa, k_n: tuning.k_n(), psrv: value, qv });
        }
    }
    Ok(out)
}

/// `2ν^{1−β}/γ`, the scale cancelling the leading bias.
fn oracle_kappa(nu: f64, gamma: f64, beta: f64) -> Result<f64, HarnessError> {
    biascalc::kappa_star_general(nu.max(spotvol::VARIANCE_FLOOR), gamma, beta).map_err(|e| HarnessError::Data(e.to_string()))
}

/// Fourier reconstruction of the whole observed sample and the vol-of-vol fitted on it. The
/// default reconstruction grid has one point per trading day.
fn feasible_inputs(obs: &LogPricePath, fourier: Option<&FourierConfig>, beta: f64, days: usize) -> Result<(VolPath, f64), HarnessError> {
    let n = obs.values.len() - 1;
    let data = |e: spotvol::SpotVolError| HarnessError::Data(e.to_string());
    let cfg = match fourier {
        Some(c) => *c,
        None => FourierConfig::per_period(n, days).map_err(data)?,
    };
    let vhat = fourier_spot_vol(obs, &cfg).map_err(data)?;
    let fit = indirect_inference(&vhat, beta).map_err(data)?;
    Ok((vhat, fit.gamma_hat))
}

/// Runs `f` on a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w.max(1));
    }
    let pool = b.build().map_err(|e| HarnessError::Config(format!("cannot start {workers:?} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Day records of every path, in path order.
pub fn collect_days(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<Vec<Vec<DayRecord>>, HarnessError> {
    cfg.validate()?;
    with_workers(workers, || (0..cfg.n_paths).into_par_iter().map(|i| path_days(cfg, i)).collect())?
}

/// Mean relative bias `(PSRV − QV)/QV` over days and paths for every cell, with the standard
/// error across per-path means.
pub fn run_scenario(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<BiasTable, HarnessError> {
    let per_path = collect_days(cfg, workers)?;
    Ok(aggregate(cfg, &per_path))
}

pub fn aggregate(cfg: &ScenarioConfig, per_path: &[Vec<DayRecord>]) -> BiasTable {
    let cells = cells(cfg);
    let c = cfg.tuning.c;
    let rows = cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let mut path_means = Vec::with_capacity(per_path.len());
            let (mut used, mut skipped, mut w_sum) = (0usize, 0usize, 0.0);
            let (mut err_sum, mut qv_sum) = (0.0, 0.0);
            for days in per_path {
                let (mut s, mut n) = (0.0, 0usize);
                for r in days.iter().filter(|r| r.cell == ci) {
                    match r.psrv {
                        Some(p) => {
                            s += (p - r.qv) / r.qv;
                            err_sum += p - r.qv;
                            qv_sum += r.qv;
                            n += 1;
                            w_sum += r.k_n as f64 * cell.mesh_seconds as f64 / 60.0;
                        }
                        None => skipped += 1,
                    }
                }
                used += n;
                if n > 0 {
                    path_means.push(s / n as f64);
                }
            }
            let (mean, se) = mean_se(&path_means);
            let delta = cfg.year.seconds(cell.mesh_seconds as f64);
            BiasRow {
                set: cfg.name.clone(),
                beta: cfg.model.beta(),
                delta_seconds: cell.mesh_seconds,
                grid_multiple: cell.grid_multiple,
                big_delta_seconds: cell.mesh_seconds * cell.grid_multiple as u64,
                lambda: cell.grid_multiple as f64 * delta.powf(1.0 - c),
                kappa: cell.kappa,
                mean_rel_bias: mean,
                std_error: se,
                pooled_rel_bias: err_sum / qv_sum,
                mean_w_minutes: if used > 0 { w_sum / used as f64 } else { f64::NAN },
                n_paths: path_means.len(),
                days_used: used,
                days_skipped: skipped,
                skipped_pct: 100.0 * skipped as f64 / (used + skipped).max(1) as f64,
            }
        })
        .collect();
    BiasTable { rows }
}

/// Sample mean and its standard error; the error is NaN with fewer than two values.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
