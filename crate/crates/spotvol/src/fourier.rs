use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use sde::{LogPricePath, PathGrid, VolPath};

use crate::{Result, SpotVolError};

/// Smoothing kernel of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Weights `1 − |k|/(M+1)`; keeps the estimate nonnegative.
    #[default]
    Fejer,
    /// Unit weights.
    Dirichlet,
}

/// Cutoffs of the Fourier estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierConfig {
    /// Highest frequency of the price coefficients.
    pub n_cut: usize,
    /// Highest frequency of the reconstruction; the output has `2·m_cut + 1` points.
    pub m_cut: usize,
    #[serde(default)]
    pub kernel: Kernel,
}

impl FourierConfig {
    /// `n_cut = ⌊(n−1)/2⌋`, the largest cutoff whose `2·n_cut + 1` frequencies are resolved
    /// by `n` returns, and `m_cut = ⌊√n·ln n/(2π)⌋`, kept below `n_cut/2`.
    pub fn default_for(n_returns: usize) -> Result<Self> {
        if n_returns < 16 {
            return Err(SpotVolError::Data(format!("need at least 16 returns, got {n_returns}")));
        }
        let n = n_returns as f64;
        let n_cut = (n_returns - 1) / 2;
        let m = (n.sqrt() * n.ln() / (2.0 * std::f64::consts::PI)).floor() as usize;
        let m_cut = m.clamp(1, (n_cut.saturating_sub(1) / 2).max(1));
        Ok(Self { n_cut, m_cut, kernel: Kernel::Fejer })
    }

    /// Nyquist price cutoff with a reconstruction grid of one point per period, for a sample
    /// spanning `periods` periods (typically trading days): `m_cut = ⌊periods/2⌋`.
    pub fn per_period(n_returns: usize, periods: usize) -> Result<Self> {
        let mut cfg = Self::default_for(n_returns)?;
        cfg.m_cut = (periods / 2).clamp(1, (cfg.n_cut.saturating_sub(1) / 2).max(1));
        Ok(cfg)
    }

    pub fn validate(&self, n_returns: usize) -> Result<()> {
        if !(1 <= self.m_cut && self.m_cut < self.n_cut && self.n_cut <= n_returns / 2) {
            return Err(SpotVolError::Config(format!(
                "cutoffs must satisfy 1 <= m_cut < n_cut <= n/2 (m_cut = {}, n_cut = {}, n = {n_returns})",
                self.m_cut, self.n_cut
            )));
        }
        Ok(())
    }
}

/// Spot variance reconstructed from the Fourier coefficients of the log-price increments.
///
/// The sample span is mapped to `[0, 2π]`. With `c_s` the coefficients of `dp`, the variance
/// coefficients are `c_k(ν) = 2π/(2N+1)·Σ_{|s|≤N} c_s·c_{k−s}`. The convolution equals a
/// transform of `r_j·g(t_j)`, with `g` the band-limited price-coefficient series at the
/// sampling times, so the whole estimator costs three FFTs. The result is returned per year
/// on `2M + 1` equally spaced points starting at the first observation.
pub fn fourier_spot_vol(path: &LogPricePath, cfg: &FourierConfig) -> Result<VolPath> {
    let returns = path.returns();
    let n = returns.len();
    if n < 16 {
        return Err(SpotVolError::Data(format!("need at least 16 returns, got {n}")));
    }
    if n < 2 * cfg.n_cut + 1 {
        return Err(SpotVolError::Data(format!("{n} returns cannot resolve {} frequencies", 2 * cfg.n_cut + 1)));
    }
    cfg.validate(n)?;
    let (big_n, m) = (cfg.n_cut, cfg.m_cut);
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // c_s = (1/2π)·Σ_j r_j e^{−i s t_j}, t_j = 2πj/n.
    let mut buf: Vec<Complex64> = returns.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    fwd.process(&mut buf);
    for (s, c) in buf.iter_mut().enumerate() {
        let freq = if s <= n / 2 { s } else { n - s };
        *c = if freq <= big_n { *c / two_pi } else { Complex64::new(0.0, 0.0) };
    }
    // g(t_j) = Σ_{|s|≤N} c_s e^{i s t_j}.
    inv.process(&mut buf);
    for (g, &r) in buf.iter_mut().zip(&returns) {
        *g *= r;
    }
    fwd.process(&mut buf);
    let scale = two_pi / (2 * big_n + 1) as f64 / two_pi;
    let coef = |k: i64| -> Complex64 { buf[k.rem_euclid(n as i64) as usize] * scale };

    // Reconstruct on t_l = 2πl/(2M+1), l = 0..2M.
    let points = 2 * m + 1;
    let weights: Vec<f64> = (0..=m)
        .map(|k| match cfg.kernel {
            Kernel::Fejer => 1.0 - k as f64 / (m + 1) as f64,
            Kernel::Dirichlet => 1.0,
        })
        .collect();
    let span = path.grid.dt * n as f64;
    let per_year = two_pi / span;
    let values = (0..points)
        .map(|l| {
            let t = two_pi * l as f64 / points as f64;
            let mut v = coef(0).re;
            for k in 1..=m {
                let e = Complex64::from_polar(1.0, k as f64 * t);
                // Coefficients of a real function are conjugate-symmetric.
                v += 2.0 * weights[k] * (coef(k as i64) * e).re;
            }
            v * per_year
        })
        .collect();
    let grid = PathGrid::new(path.grid.t_start, span / points as f64, points - 1)
        .map_err(|e| SpotVolError::Config(e.to_string()))?;
    VolPath::new(grid, values).map_err(|e| SpotVolError::Data(e.to_string()))
}
