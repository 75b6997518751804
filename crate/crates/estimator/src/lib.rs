//! Spot-variance estimation by local averaging of squared returns, the realized variance of
//! those estimates over a horizon, and the fine-grid quadratic variation used as ground truth.

mod tuning;

use sde::{LogPricePath, VolPath};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tuning::{ceil_count, Tuning};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("window [{start}, {end}] is not covered by the path [{path_start}, {path_end}]")]
    Coverage { start: f64, end: f64, path_start: f64, path_end: f64 },
    #[error("horizon {h} holds no complete increment of length {big_delta}")]
    DegenerateHorizon { h: f64, big_delta: f64 },
    #[error("invalid tuning: {0}")]
    Tuning(String),
}

/// Outcome of one realized variance of spot-variance estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsrvResult {
    /// Estimated quadratic variation of the variance over the horizon.
    pub value: f64,
    /// Number of squared spot-variance increments summed.
    pub n_increments: usize,
    /// Whether consecutive local windows share returns.
    pub overlap: bool,
}

/// Locally averaged realized variance at `t` from the `k_n` returns ending at the grid point
/// at or before `t`.
pub fn local_avg_rv(path: &LogPricePath, t: f64, k_n: usize) -> Result<f64, EstimatorError> {
    let end = end_index(path, t)?;
    larv_at(path, end, k_n)
}

fn end_index(path: &LogPricePath, t: f64) -> Result<usize, EstimatorError> {
    path.grid.floor_index(t).ok_or_else(|| coverage(path, t, t))
}

fn coverage(path: &LogPricePath, start: f64, end: f64) -> EstimatorError {
    EstimatorError::Coverage { start, end, path_start: path.grid.t_start, path_end: path.grid.t_end() }
}

/// Average of the `k_n` squared returns ending at grid index `end`.
fn larv_at(path: &LogPricePath, end: usize, k_n: usize) -> Result<f64, EstimatorError> {
    if k_n == 0 {
        return Err(EstimatorError::Tuning("window must hold at least one return".into()));
    }
    if end < k_n || end > path.grid.n_steps {
        let dt = path.grid.dt;
        let t_end = path.grid.time(end);
        return Err(coverage(path, t_end - k_n as f64 * dt, t_end));
    }
    let p = &path.values;
    let mut acc = 0.0;
    for j in end + 1 - k_n..=end {
        let r = p[j] - p[j - 1];
        acc += r * r;
    }
    Ok(acc / (k_n as f64 * path.grid.dt))
}

/// Realized variance of spot-variance estimates over `[τ, τ + h]`.
///
/// `τ` is snapped to the price grid by flooring; the estimates are taken every `λ_n` grid
/// steps with the tuning's window of `k_n` returns. The path mesh is used as `δ_N`.
pub fn psrv(path: &LogPricePath, tuning: &Tuning) -> Result<PsrvResult, EstimatorError> {
    tuning.validate()?;
    let k = tuning.k_n();
    let lam = tuning.lambda_n();
    let n = tuning.n_increments();
    if n == 0 {
        return Err(EstimatorError::DegenerateHorizon { h: tuning.h, big_delta: tuning.big_delta_n() });
    }
    let start = end_index(path, tuning.tau)?;
    let last = start + n * lam;
    if start < k || last > path.grid.n_steps {
        let dt = path.grid.dt;
        return Err(coverage(path, path.grid.time(start) - k as f64 * dt, path.grid.time(start) + (n * lam) as f64 * dt));
    }
    let mut prev = larv_at(path, start, k)?;
    let mut value = 0.0;
    for i in 1..=n {
        let cur = larv_at(path, start + i * lam, k)?;
        let d = cur - prev;
        value += d * d;
        prev = cur;
    }
    Ok(PsrvResult { value, n_increments: n, overlap: tuning.overlaps() })
}

/// Sum of squared variance increments on the simulation grid over `[τ, τ + h]`.
pub fn true_qv(vol: &VolPath, tau: f64, h: f64) -> Result<f64, EstimatorError> {
    let g = &vol.grid;
    let out = || EstimatorError::Coverage { start: tau, end: tau + h, path_start: g.t_start, path_end: g.t_end() };
    let a = g.floor_index(tau).ok_or_else(out)?;
    let b = g.floor_index(tau + h).ok_or_else(out)?;
    Ok(vol.values[a..=b].windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum())
}
