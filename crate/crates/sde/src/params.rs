use serde::{Deserialize, Serialize};

use crate::error::{param, SdeError};

/// Square-root (CIR) variance dynamics `dν = θ(α − ν)dt + γ√ν dZ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    /// Long-run mean of the variance (1/year).
    pub alpha: f64,
    /// Mean-reversion speed (1/year).
    pub theta: f64,
    /// Vol-of-vol coefficient.
    pub gamma: f64,
    /// Variance at time zero (1/year).
    pub nu0: f64,
}

impl CirParams {
    pub fn new(alpha: f64, theta: f64, gamma: f64, nu0: f64) -> Result<Self, SdeError> {
        let p = Self { alpha, theta, gamma, nu0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        positive("alpha", self.alpha)?;
        positive("theta", self.theta)?;
        positive("gamma", self.gamma)?;
        positive("nu0", self.nu0)?;
        if 2.0 * self.alpha * self.theta <= self.gamma * self.gamma {
            return Err(param(
                "gamma",
                format!(
                    "Feller condition 2·alpha·theta > gamma² fails ({} <= {})",
                    2.0 * self.alpha * self.theta,
                    self.gamma * self.gamma
                ),
            ));
        }
        Ok(())
    }

    /// Mean of the variance at time `t`.
    pub fn mean_at(&self, t: f64) -> f64 {
        self.alpha + (self.nu0 - self.alpha) * (-self.theta * t).exp()
    }
}

/// CKLS variance dynamics `dν = θ(α − ν)dt + γν^β dZ` with a drifting, correlated log price
/// `dp = μ dt + √ν dW`, `dW = ρ dZ + √(1 − ρ²) dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CklsParams {
    pub alpha: f64,
    pub theta: f64,
    pub gamma: f64,
    pub nu0: f64,
    /// Diffusion exponent, at least 1/2.
    pub beta: f64,
    /// Price drift (1/year).
    pub mu: f64,
    /// Correlation between price and variance shocks.
    pub rho: f64,
}

impl CklsParams {
    /// CIR variance leg with the given drift and leverage.
    pub fn from_cir(cir: CirParams, mu: f64, rho: f64) -> Self {
        Self { alpha: cir.alpha, theta: cir.theta, gamma: cir.gamma, nu0: cir.nu0, beta: 0.5, mu, rho }
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        positive("alpha", self.alpha)?;
        positive("theta", self.theta)?;
        positive("gamma", self.gamma)?;
        positive("nu0", self.nu0)?;
        if !(self.beta >= 0.5) {
            return Err(param("beta", format!("must be at least 1/2, got {}", self.beta)));
        }
        if !self.mu.is_finite() {
            return Err(param("mu", "must be finite"));
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(param("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        if self.is_cir() {
            self.cir().validate()?;
        }
        Ok(())
    }

    pub fn is_cir(&self) -> bool {
        self.beta == 0.5
    }

    /// The variance parameters alone.
    pub fn cir(&self) -> CirParams {
        CirParams { alpha: self.alpha, theta: self.theta, gamma: self.gamma, nu0: self.nu0 }
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), SdeError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(name, format!("must be positive and finite, got {v}")))
    }
}
