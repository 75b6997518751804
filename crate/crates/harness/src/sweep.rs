//! Monte Carlo bias over a grid of window scales and grid steps, with closed-form overlays.

use serde::{Deserialize, Serialize};

use biascalc::{bias_closed_form, expected_qv, leading_bias_no_overlap, leading_term_overlap};
use estimator::Tuning;
use sde::{NoiseMoments, NoiseSpec};

use crate::config::{KappaMode, Model, ScenarioConfig};
use crate::scenario::{cells, run_scenario, Cell};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub set: String,
    pub delta_seconds: u64,
    pub grid_multiple: usize,
    pub big_delta_seconds: u64,
    pub lambda: f64,
    pub kappa: f64,
    pub mean_rel_bias: f64,
    pub std_error: f64,
    pub mean_w_minutes: f64,
    pub n_paths: usize,
    pub days_used: usize,
    pub days_skipped: usize,
    /// Exact relative bias averaged over the evaluated days; NaN where it is not available.
    pub closed_form_rel: f64,
    /// Small-mesh leading term relative to the expected quadratic variation, averaged over days.
    pub leading_rel: f64,
}

/// Runs the scenario for every fixed scale and grid step and appends the closed-form relative
/// bias and its leading term (CIR dynamics only; NaN otherwise).
pub fn bias_sweep(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<Vec<SweepRow>, HarnessError> {
    if !matches!(cfg.tuning.kappa, KappaMode::Fixed { .. }) {
        return Err(HarnessError::Config("tuning.mode: a sweep needs fixed window scales".into()));
    }
    let table = run_scenario(cfg, workers)?;
    Ok(table
        .rows
        .into_iter()
        .zip(cells(cfg))
        .map(|(mc, cell)| {
            let (closed_form_rel, leading_rel) = overlay(cfg, &cell);
            SweepRow {
                set: mc.set,
                delta_seconds: mc.delta_seconds,
                grid_multiple: mc.grid_multiple,
                big_delta_seconds: mc.big_delta_seconds,
                lambda: mc.lambda,
                kappa: cell.kappa.expect("fixed cells carry a scale"),
                mean_rel_bias: mc.mean_rel_bias,
                std_error: mc.std_error,
                mean_w_minutes: mc.mean_w_minutes,
                n_paths: mc.n_paths,
                days_used: mc.days_used,
                days_skipped: mc.days_skipped,
                closed_form_rel,
                leading_rel,
            }
        })
        .collect())
}

/// Closed-form relative bias and leading term of one cell, averaged over the evaluated days.
pub fn overlay(cfg: &ScenarioConfig, cell: &Cell) -> (f64, f64) {
    if !matches!(cfg.model, Model::Cir) {
        return (f64::NAN, f64::NAN);
    }
    let noise = match cfg.noise {
        None => None,
        Some(NoiseSpec::Moments { v_eta, q_eta }) => Some(NoiseMoments { v_eta, q_eta }),
        // A ratio is calibrated per path, so there is no single exact value.
        Some(NoiseSpec::Ratio { .. }) => return (f64::NAN, f64::NAN),
    };
    let params = cfg.params.cir();
    let delta = cfg.year.seconds(cell.mesh_seconds as f64);
    let days = cfg.sampling.eval_days;
    let (mut exact, mut lead) = (0.0, 0.0);
    for d in 0..days {
        let tuning = Tuning {
            delta_n: delta,
            b: cfg.tuning.b,
            c: cfg.tuning.c,
            kappa: cell.kappa.unwrap_or(f64::NAN),
            lambda: cell.grid_multiple as f64 * delta.powf(1.0 - cfg.tuning.c),
            h: cfg.horizon(),
            tau: cfg.day_start(d),
        };
        let qv = expected_qv(&params, tuning.tau, tuning.effective_horizon());
        exact += bias_closed_form(&params, &tuning, noise).map(|b| b.total / qv).unwrap_or(f64::NAN);
        let l = if tuning.overlaps() {
            leading_term_overlap(&params, &tuning, None)
        } else {
            leading_bias_no_overlap(&params, &tuning)
        };
        lead += l.map(|v| v / qv).unwrap_or(f64::NAN);
    }
    (exact / days as f64, lead / days as f64)
}
