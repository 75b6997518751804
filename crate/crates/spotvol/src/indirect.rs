use serde::{Deserialize, Serialize};

use sde::VolPath;

use crate::{Result, SpotVolError};

/// Floor applied to reconstructed variances before the regression transforms (per year).
pub const VARIANCE_FLOOR: f64 = 1e-10;

/// Zero-intercept regression of normalized variance increments on transformed levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndirectFit {
    /// `ω̂/√Δ` with `Δ` the mesh of the regressed path.
    pub gamma_hat: f64,
    /// Mean-reversion speed implied by the slope on `ν^{1−β}`. Unreliable on short spans.
    pub theta_hat: f64,
    /// Slope on `ν^{−β}`, estimating `αθ`. Unreliable on short spans.
    pub alpha_theta_hat: f64,
    /// Uncentered coefficient of determination.
    pub r2: f64,
    /// Residual standard deviation.
    pub omega_hat: f64,
    /// Points raised to [`VARIANCE_FLOOR`].
    pub floored: usize,
    /// Set when all increments vanish and `r2` is meaningless.
    pub degenerate: bool,
}

/// Regresses `Y_i = (ν_{i+1} − ν_i)/ν_i^β` on `ν_i^{−β}` and `ν_i^{1−β}` without intercept.
///
/// For `dν = θ(α − ν)dt + γν^β dZ` sampled at mesh `Δ`, the slopes estimate `αθΔ` and `−θΔ`
/// and the residual deviation estimates `γ√Δ`.
pub fn indirect_inference(vol_hat: &VolPath, beta: f64) -> Result<IndirectFit> {
    let n_pts = vol_hat.values.len();
    if n_pts < 10 {
        return Err(SpotVolError::Data(format!("need at least 10 variance points, got {n_pts}")));
    }
    let dt = vol_hat.grid.dt;
    let mut floored = 0;
    let v: Vec<f64> = vol_hat
        .values
        .iter()
        .map(|&x| {
            if x < VARIANCE_FLOOR {
                floored += 1;
                VARIANCE_FLOOR
            } else {
                x
            }
        })
        .collect();

    let (mut s11, mut s12, mut s22, mut s1y, mut s2y, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut rows = Vec::with_capacity(n_pts - 1);
    for w in v.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pb = a.powf(beta);
        let (x1, x2, y) = (1.0 / pb, a / pb, (b - a) / pb);
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
        syy += y * y;
        rows.push((x1, x2, y));
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * s11 * s22) {
        return Err(SpotVolError::Degenerate("regressors are collinear".into()));
    }
    let b1 = (s22 * s1y - s12 * s2y) / det;
    let b2 = (s11 * s2y - s12 * s1y) / det;
    let ssr: f64 = rows.iter().map(|&(x1, x2, y)| (y - b1 * x1 - b2 * x2).powi(2)).sum();
    let dof = (rows.len() - 2) as f64;
    let omega_hat = (ssr / dof).sqrt();
    let degenerate = syy == 0.0;
    let r2 = if degenerate { 0.0 } else { (1.0 - ssr / syy).clamp(0.0, 1.0) };
    Ok(IndirectFit {
        gamma_hat: omega_hat / dt.sqrt(),
        theta_hat: -b2 / dt,
        alpha_theta_hat: b1 / dt,
        r2,
        omega_hat,
        floored,
        degenerate,
    })
}
