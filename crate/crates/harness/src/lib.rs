//! Experiment harness: Monte Carlo bias tables, closed-form sweeps, thresholds and the
//! empirical pipeline, with deterministic CSV/JSON output.

pub mod config;
pub mod empirical;
pub mod output;
pub mod scenario;
pub mod selftest;
pub mod sweep;
pub mod thresholds;

use thiserror::Error;

pub use config::{KappaMode, Model, ParamSet, Sampling, ScenarioConfig, TuningSpec, YearLayout};
pub use empirical::{adjust_window_for_jumps, ingest_csv, run_empirical, EmpiricalConfig, EmpiricalRow, JumpCalendar, TickData};
pub use scenario::{run_scenario, BiasRow, BiasTable};
pub use sweep::{bias_sweep, SweepRow};
pub use thresholds::{threshold_curves, ThresholdConfig, ThresholdRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) | HarnessError::Io(_) => 3,
        }
    }
}

impl From<sde::SdeError> for HarnessError {
    fn from(e: sde::SdeError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<estimator::EstimatorError> for HarnessError {
    fn from(e: estimator::EstimatorError) -> Self {
        HarnessError::Data(e.to_string())
    }
}
