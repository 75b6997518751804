//! Simulation of mean-reverting variance processes and the log prices they drive.
//!
//! Time is measured in years of 252 trading days of 6 hours each, so one second is
//! `1 / SECONDS_PER_YEAR`. Every simulator is a pure function of its parameters, grid and
//! [`StreamSeed`]; paths generated in parallel match paths generated serially.

mod error;
mod noise;
mod params;
mod path;
mod rng;
mod simulate;

pub use error::SdeError;
pub use noise::{add_noise, resolve_noise, NoiseMoments, NoiseSpec};
pub use params::{CirParams, CklsParams};
pub use path::{subsample, LogPricePath, PathGrid, VolPath};
pub use rng::StreamSeed;
pub use simulate::{simulate_cir, simulate_ckls};

/// Trading days per year.
pub const DAYS_PER_YEAR: f64 = 252.0;
/// Trading hours per day.
pub const HOURS_PER_DAY: f64 = 6.0;
/// Seconds in one trading year.
pub const SECONDS_PER_YEAR: f64 = DAYS_PER_YEAR * HOURS_PER_DAY * 3600.0;

/// Converts a duration in seconds to years.
pub fn seconds(s: f64) -> f64 {
    s / SECONDS_PER_YEAR
}

/// Converts a duration in minutes to years.
pub fn minutes(m: f64) -> f64 {
    seconds(60.0 * m)
}

/// Converts a duration in trading days to years.
pub fn days(d: f64) -> f64 {
    d / DAYS_PER_YEAR
}
