//! Feasible tuning from data alone: Fourier reconstruction of the spot variance, indirect
//! inference of the vol-of-vol, and the window scale built from both.

mod fourier;
mod indirect;

pub use fourier::{fourier_spot_vol, FourierConfig, Kernel};
pub use indirect::{indirect_inference, IndirectFit, VARIANCE_FLOOR};

use sde::LogPricePath;

#[derive(Debug, thiserror::Error)]
pub enum SpotVolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    Data(String),
    #[error("degenerate estimate: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, SpotVolError>;

/// Window scale `2ν̂(τ)^{1−β}/γ̂` estimated from prices.
///
/// The spot variance is the reconstruction point nearest `tau`; `γ̂` comes from regressing
/// the whole reconstruction. `cfg = None` uses [`FourierConfig::default_for`].
pub fn feasible_kappa(prices: &LogPricePath, tau: f64, beta: f64, cfg: Option<FourierConfig>) -> Result<f64> {
    let n = prices.values.len().saturating_sub(1);
    let cfg = match cfg {
        Some(c) => c,
        None => FourierConfig::default_for(n)?,
    };
    let vol = fourier_spot_vol(prices, &cfg)?;
    let fit = indirect_inference(&vol, beta)?;
    let nu = nearest(&vol, tau).max(VARIANCE_FLOOR);
    kappa_from(nu, fit.gamma_hat, beta)
}

/// `2ν^{1−β}/γ`.
pub fn kappa_from(nu: f64, gamma_hat: f64, beta: f64) -> Result<f64> {
    if !(gamma_hat > 0.0) {
        return Err(SpotVolError::Degenerate(format!("vol-of-vol estimate is {gamma_hat}")));
    }
    Ok(2.0 * nu.powf(1.0 - beta) / gamma_hat)
}

/// Value at the grid point nearest `t`, clamped to the path.
pub fn nearest(vol: &sde::VolPath, t: f64) -> f64 {
    let g = vol.grid;
    let i = ((t - g.t_start) / g.dt).round().clamp(0.0, g.n_steps as f64) as usize;
    vol.values[i]
}
