use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::SdeError;
use crate::path::LogPricePath;
use crate::rng::{StreamSeed, LEG_NOISE};
use crate::SECONDS_PER_YEAR;

/// Microstructure noise description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Explicit second and fourth moments of the noise.
    Moments { v_eta: f64, q_eta: f64 },
    /// Ratio of the noise-increment std to the std of one-second returns.
    Ratio { zeta: f64 },
}

/// Resolved noise moments `E[η²]` and `E[η⁴]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseMoments {
    pub v_eta: f64,
    pub q_eta: f64,
}

impl NoiseMoments {
    /// Gaussian noise with variance `v_eta`.
    pub fn gaussian(v_eta: f64) -> Self {
        Self { v_eta, q_eta: 3.0 * v_eta * v_eta }
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        if !(self.v_eta >= 0.0) || !self.v_eta.is_finite() {
            return Err(SdeError::Argument(format!("noise variance must be nonnegative, got {}", self.v_eta)));
        }
        if !(self.q_eta >= self.v_eta * self.v_eta * (1.0 - 1e-12)) {
            return Err(SdeError::Argument("noise fourth moment must be at least the squared variance".into()));
        }
        Ok(())
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), SdeError> {
        match *self {
            NoiseSpec::Moments { v_eta, q_eta } => NoiseMoments { v_eta, q_eta }.validate(),
            NoiseSpec::Ratio { zeta } if zeta >= 0.0 && zeta.is_finite() => Ok(()),
            NoiseSpec::Ratio { zeta } => Err(SdeError::Argument(format!("zeta must be nonnegative, got {zeta}"))),
        }
    }
}

/// Resolves a noise spec against a noise-free path.
///
/// For a ratio `ζ`, the variance is `V_η = ζ²·Var(r₁ₛ)/2` with `Var(r₁ₛ)` the sample variance of
/// one-second returns. Paths on another mesh are rescaled to one second by `1s/dt`, which is
/// exact for the diffusive part of the return variance.
pub fn resolve_noise(path: &LogPricePath, spec: &NoiseSpec) -> Result<NoiseMoments, SdeError> {
    spec.validate()?;
    match *spec {
        NoiseSpec::Moments { v_eta, q_eta } => Ok(NoiseMoments { v_eta, q_eta }),
        NoiseSpec::Ratio { zeta } => {
            if zeta == 0.0 {
                return Ok(NoiseMoments::default());
            }
            let r = path.returns();
            if r.len() < 2 {
                return Err(SdeError::Calibration("need at least two returns to calibrate zeta".into()));
            }
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let var = r.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            if !(var > 0.0) {
                return Err(SdeError::Calibration("returns have zero variance".into()));
            }
            let per_second = var / (path.grid.dt * SECONDS_PER_YEAR);
            Ok(NoiseMoments::gaussian(0.5 * zeta * zeta * per_second))
        }
    }
}

/// Adds i.i.d. Gaussian noise to every observation.
pub fn add_noise(path: &LogPricePath, spec: &NoiseSpec, seed: StreamSeed) -> Result<LogPricePath, SdeError> {
    let moments = resolve_noise(path, spec)?;
    Ok(add_gaussian_noise(path, moments.v_eta, seed))
}

pub(crate) fn add_gaussian_noise(path: &LogPricePath, v_eta: f64, seed: StreamSeed) -> LogPricePath {
    if v_eta == 0.0 {
        return path.clone();
    }
    let sd = v_eta.sqrt();
    let mut rng = seed.leg(LEG_NOISE);
    let values = path
        .values
        .iter()
        .map(|p| {
            let z: f64 = rng.sample(StandardNormal);
            p + sd * z
        })
        .collect();
    LogPricePath { grid: path.grid, values }
}
