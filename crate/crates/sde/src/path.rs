use serde::{Deserialize, Serialize};

use crate::error::SdeError;

/// Uniform time grid `t_start + i·dt`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub t_start: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl PathGrid {
    pub fn new(t_start: f64, dt: f64, n_steps: usize) -> Result<Self, SdeError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SdeError::Argument(format!("grid mesh must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(SdeError::Argument("grid needs at least one step".into()));
        }
        if !t_start.is_finite() {
            return Err(SdeError::Argument("grid start must be finite".into()));
        }
        Ok(Self { t_start, dt, n_steps })
    }

    /// Grid of `n_steps` steps of `dt` covering `[0, n_steps·dt]`.
    pub fn from_zero(dt: f64, n_steps: usize) -> Result<Self, SdeError> {
        Self::new(0.0, dt, n_steps)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// Index of the last grid point at or before `t`, using a small relative tolerance so that
    /// times that are grid points up to rounding land on themselves.
    pub fn floor_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.t_start) / self.dt;
        let i = (x + 1e-9 * x.abs().max(1.0)).floor();
        if i < 0.0 || i > self.n_steps as f64 {
            None
        } else {
            Some(i as usize)
        }
    }
}

/// Spot variance sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolPath {
    pub grid: PathGrid,
    pub values: Vec<f64>,
}

/// Log prices sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPricePath {
    pub grid: PathGrid,
    pub values: Vec<f64>,
}

impl LogPricePath {
    pub fn new(grid: PathGrid, values: Vec<f64>) -> Result<Self, SdeError> {
        if values.len() != grid.n_steps + 1 {
            return Err(SdeError::Argument(format!(
                "path has {} values but grid expects {}",
                values.len(),
                grid.n_steps + 1
            )));
        }
        Ok(Self { grid, values })
    }

    /// Increments `p(t_i) − p(t_{i−1})`.
    pub fn returns(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

impl VolPath {
    pub fn new(grid: PathGrid, values: Vec<f64>) -> Result<Self, SdeError> {
        if values.len() != grid.n_steps + 1 {
            return Err(SdeError::Argument(format!(
                "path has {} values but grid expects {}",
                values.len(),
                grid.n_steps + 1
            )));
        }
        Ok(Self { grid, values })
    }

    /// Keeps every `stride`-th sample starting at index zero.
    pub fn subsample(&self, stride: usize) -> Result<VolPath, SdeError> {
        let (grid, values) = thin(&self.grid, &self.values, stride)?;
        Ok(VolPath { grid, values })
    }
}

/// Keeps every `stride`-th observation starting at index zero.
pub fn subsample(path: &LogPricePath, stride: usize) -> Result<LogPricePath, SdeError> {
    let (grid, values) = thin(&path.grid, &path.values, stride)?;
    Ok(LogPricePath { grid, values })
}

fn thin(grid: &PathGrid, values: &[f64], stride: usize) -> Result<(PathGrid, Vec<f64>), SdeError> {
    if stride == 0 {
        return Err(SdeError::Argument("stride must be at least 1".into()));
    }
    if stride > grid.n_steps {
        return Err(SdeError::Argument(format!(
            "stride {stride} exceeds the {} steps of the path",
            grid.n_steps
        )));
    }
    let values: Vec<f64> = values.iter().step_by(stride).copied().collect();
    let grid = PathGrid { t_start: grid.t_start, dt: grid.dt * stride as f64, n_steps: values.len() - 1 };
    Ok((grid, values))
}
