use serde::{Deserialize, Serialize};

use crate::EstimatorError;

/// Tuning of the estimator: price mesh, window and grid scales with their rate exponents,
/// horizon and start time. Counts are derived on demand so they can never go stale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    /// Price mesh `δ_N` (years).
    pub delta_n: f64,
    /// Window rate exponent, in `(−1, 0]`.
    pub b: f64,
    /// Grid rate exponent, in `(0, 1)`.
    pub c: f64,
    /// Window scale.
    pub kappa: f64,
    /// Grid scale.
    pub lambda: f64,
    /// Horizon (years).
    pub h: f64,
    /// Start time (years).
    pub tau: f64,
}

/// `⌈x⌉` that ignores representation error of a few ulps above an integer.
pub fn ceil_count(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

impl Tuning {
    /// Tuning whose window and grid are given directly as counts of price steps; `κ` and `λ`
    /// are set to the values those counts imply.
    pub fn from_counts(delta_n: f64, b: f64, c: f64, k_n: usize, lambda_n: usize, h: f64, tau: f64) -> Self {
        Self {
            delta_n,
            b,
            c,
            kappa: k_n as f64 * delta_n.powf(-b),
            lambda: lambda_n as f64 * delta_n.powf(1.0 - c),
            h,
            tau,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |m: String| Err(EstimatorError::Tuning(m));
        if !(self.delta_n > 0.0 && self.delta_n.is_finite()) {
            return bad(format!("price mesh must be positive, got {}", self.delta_n));
        }
        if !(self.b > -1.0 && self.b <= 0.0) {
            return bad(format!("window exponent must lie in (-1, 0], got {}", self.b));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("grid exponent must lie in (0, 1), got {}", self.c));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("window scale must be positive, got {}", self.kappa));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("grid scale must be positive, got {}", self.lambda));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.h));
        }
        if self.big_delta_n() > self.h * (1.0 + 1e-12) {
            return bad(format!("grid step {} exceeds the horizon {}", self.big_delta_n(), self.h));
        }
        Ok(())
    }

    /// Price observations in the horizon, `⌊h/δ_N⌋`.
    pub fn n_obs(&self) -> usize {
        floor_count(self.h / self.delta_n)
    }

    /// Window length in returns, `⌈κ·δ_N^b⌉`.
    pub fn k_n(&self) -> usize {
        ceil_count(self.kappa * self.delta_n.powf(self.b)).max(1)
    }

    /// Grid step in returns, `min(N, ⌈λ·δ_N^{c−1}⌉)`.
    pub fn lambda_n(&self) -> usize {
        ceil_count(self.lambda * self.delta_n.powf(self.c - 1.0)).clamp(1, self.n_obs().max(1))
    }

    /// Grid step `Δ_N` (years).
    pub fn big_delta_n(&self) -> f64 {
        self.lambda_n() as f64 * self.delta_n
    }

    /// Window length `W_N` (years).
    pub fn w_n(&self) -> f64 {
        self.k_n() as f64 * self.delta_n
    }

    /// Number of squared increments, `⌊h/Δ_N⌋`.
    pub fn n_increments(&self) -> usize {
        floor_count(self.h / self.big_delta_n())
    }

    /// Horizon actually spanned by the increments, `⌊h/Δ_N⌋·Δ_N`.
    pub fn effective_horizon(&self) -> f64 {
        self.n_increments() as f64 * self.big_delta_n()
    }

    /// Whether consecutive windows overlap, `W_N > Δ_N`; equality counts as no overlap.
    pub fn overlaps(&self) -> bool {
        self.k_n() > self.lambda_n()
    }
}

fn floor_count(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.floor().max(0.0) as usize
    }
}
