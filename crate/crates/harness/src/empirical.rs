//! Tick-data ingestion, the jump-day window rule and daily PSRV series from observed prices.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime, TimeDelta};
use serde::{Deserialize, Serialize};

use estimator::{local_avg_rv, Tuning};
use sde::{LogPricePath, PathGrid};
use spotvol::{fourier_spot_vol, indirect_inference, kappa_from, nearest, FourierConfig};

use crate::config::YearLayout;
use crate::HarnessError;

/// Column mapping and resampling mesh for tick files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    #[serde(default = "default_time_col")]
    pub timestamp_column: String,
    #[serde(default = "default_price_col")]
    pub price_column: String,
    pub mesh_seconds: u64,
    /// Length of one trading session.
    pub session_seconds: u64,
    /// Session open; defaults to the time of day of the first tick.
    #[serde(default)]
    pub open: Option<NaiveTime>,
    #[serde(default = "default_year_days")]
    pub days_per_year: f64,
}

fn default_time_col() -> String {
    "timestamp".into()
}

fn default_price_col() -> String {
    "price".into()
}

fn default_year_days() -> f64 {
    sde::DAYS_PER_YEAR
}

impl IngestSpec {
    pub fn new(mesh_seconds: u64, session_seconds: u64) -> Self {
        Self {
            timestamp_column: default_time_col(),
            price_column: default_price_col(),
            mesh_seconds,
            session_seconds,
            open: None,
            days_per_year: default_year_days(),
        }
    }

    pub fn steps_per_day(&self) -> usize {
        (self.session_seconds / self.mesh_seconds) as usize
    }

    pub fn year(&self) -> YearLayout {
        YearLayout { days: self.days_per_year, hours_per_day: self.session_seconds as f64 / 3600.0 }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.mesh_seconds == 0 || self.session_seconds == 0 || self.session_seconds % self.mesh_seconds != 0 {
            return Err(HarnessError::Config("ingest: the mesh must be positive and divide the session".into()));
        }
        if self.session_seconds > 86_400 {
            return Err(HarnessError::Config("ingest: a session cannot exceed one day".into()));
        }
        if !(self.days_per_year > 0.0) {
            return Err(HarnessError::Config("ingest: days_per_year must be positive".into()));
        }
        Ok(())
    }
}

/// Log prices resampled to a uniform mesh in trading time.
///
/// Trading day `d` covers grid indices `d·N ..= (d + 1)·N`; index `d·N` is both the close of day
/// `d − 1` and the open of day `d`, so overnight returns are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct TickData {
    pub path: LogPricePath,
    pub dates: Vec<NaiveDate>,
    pub steps_per_day: usize,
    pub mesh_seconds: u64,
    pub open: NaiveTime,
    pub year: YearLayout,
    /// Price carried by each grid point.
    pub prices: Vec<f64>,
    /// Grid points with no tick since the previous grid point.
    pub gaps: usize,
}

impl TickData {
    /// Wall-clock time of grid index `i`.
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        let (d, j) = if i == 0 { (0, 0) } else { ((i - 1) / self.steps_per_day, (i - 1) % self.steps_per_day + 1) };
        self.dates[d].and_time(self.open) + TimeDelta::seconds((j as u64 * self.mesh_seconds) as i64)
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        let secs = x.floor();
        let nanos = ((x - secs) * 1e9).round() as u32;
        return DateTime::from_timestamp(secs as i64, nanos.min(999_999_999)).map(|t| t.naive_utc());
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads `timestamp,price` rows, takes logs and resamples each session by last-tick
/// interpolation.
pub fn ingest_csv<R: Read>(reader: R, spec: &IngestSpec) -> Result<TickData, HarnessError> {
    spec.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| HarnessError::Data(format!("header: {e}")))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| HarnessError::Data(format!("header lacks column '{name}'")))
    };
    let (ti, pi) = (col(&spec.timestamp_column)?, col(&spec.price_column)?);
    let mut ticks: Vec<(NaiveDateTime, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Data(e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| HarnessError::Data(format!("row {row}: {what}"));
        let t = rec.get(ti).and_then(parse_timestamp).ok_or_else(|| bad("unparsable timestamp"))?;
        let p: f64 = rec.get(pi).and_then(|s| s.parse().ok()).ok_or_else(|| bad("unparsable price"))?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(bad("price must be positive"));
        }
        if let Some((last, _)) = ticks.last() {
            if t <= *last {
                return Err(bad("timestamps must be strictly increasing"));
            }
        }
        ticks.push((t, p));
    }
    if ticks.is_empty() {
        return Err(HarnessError::Data("file holds no ticks".into()));
    }
    let open = spec.open.unwrap_or_else(|| ticks[0].0.time());
    let mut dates: Vec<NaiveDate> = ticks.iter().map(|(t, _)| t.date()).collect();
    dates.dedup();
    let n = spec.steps_per_day();
    let mesh = TimeDelta::seconds(spec.mesh_seconds as i64);

    let mut prices = Vec::with_capacity(1 + dates.len() * n);
    let mut gaps = 0;
    let mut next = 0;
    let mut current: Option<f64> = None;
    for (d, date) in dates.iter().enumerate() {
        let start = date.and_time(open);
        for j in if d == 0 { 0 } else { 1 }..=n {
            let g = start + mesh * j as i32;
            let before = next;
            while next < ticks.len() && ticks[next].0 <= g {
                current = Some(ticks[next].1);
                next += 1;
            }
            if next == before && !(d == 0 && j == 0) {
                gaps += 1;
            }
            let p = current.ok_or_else(|| HarnessError::Data(format!("no tick at or before the first grid point {g}")))?;
            prices.push(p);
        }
    }
    let year = spec.year();
    let grid = PathGrid::from_zero(year.seconds(spec.mesh_seconds as f64), prices.len() - 1)?;
    let path = LogPricePath::new(grid, prices.iter().map(|p| p.ln()).collect())?;
    Ok(TickData { path, dates, steps_per_day: n, mesh_seconds: spec.mesh_seconds, open, year, prices, gaps })
}

/// Writes the resampled series as `timestamp,price`; ingesting the output with the same mesh
/// reproduces the series exactly.
pub fn emit_csv<W: Write>(data: &TickData, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
    w.write_record(["timestamp", "price"]).map_err(io)?;
    for (i, p) in data.prices.iter().enumerate() {
        w.write_record([data.timestamp(i).format("%Y-%m-%dT%H:%M:%S").to_string(), p.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Tick data whose grid is a given log-price path, on consecutive dates from `first_date`.
/// Prices are `exp` of the log prices.
pub fn ticks_from_path(path: &LogPricePath, steps_per_day: usize, mesh_seconds: u64, first_date: NaiveDate, open: NaiveTime, year: YearLayout) -> Result<TickData, HarnessError> {
    let n_steps = path.values.len() - 1;
    if steps_per_day == 0 || n_steps % steps_per_day != 0 {
        return Err(HarnessError::Data("the path must cover whole days".into()));
    }
    let dates = (0..n_steps / steps_per_day).map(|d| first_date + TimeDelta::days(d as i64)).collect();
    let prices: Vec<f64> = path.values.iter().map(|x| x.exp()).collect();
    let path = LogPricePath::new(path.grid, prices.iter().map(|p| p.ln()).collect())?;
    Ok(TickData { path, dates, steps_per_day, mesh_seconds, open, year, prices, gaps: 0 })
}

/// Days flagged as containing a price jump.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpCalendar {
    pub days: BTreeMap<NaiveDate, bool>,
}

impl JumpCalendar {
    /// Reads `date,has_jump` rows (`true`/`false` or `1`/`0`).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, HarnessError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut days = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| HarnessError::Data(e.to_string()))?;
            let row = rec.position().map_or(0, |p| p.line());
            let bad = |what: &str| HarnessError::Data(format!("calendar row {row}: {what}"));
            let date = rec.get(0).and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()).ok_or_else(|| bad("unparsable date"))?;
            let flag = match rec.get(1).map(|s| s.to_ascii_lowercase()) {
                Some(s) if s == "true" || s == "1" => true,
                Some(s) if s == "false" || s == "0" => false,
                _ => return Err(bad("has_jump must be true/false or 1/0")),
            };
            days.insert(date, flag);
        }
        Ok(Self { days })
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

/// Outcome of the jump rule for one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WindowPlan {
    /// A jump on the day or the day before: no PSRV.
    Skip,
    /// Window length (days) at each instant `τ + iΔ`.
    Windows(Vec<f64>),
}

/// Window lengths for day `tau_day` of `dates`.
///
/// A jump on the day or the one before skips the day. Otherwise windows may not reach back
/// past the end of the last jump day: at instant `τ + iΔ` the window is
/// `min(w_target, j + iΔ)`, where the last jump day ended `j` days before `τ`. An empty calendar
/// means no jumps; a nonempty one must cover every day the windows can reach.
pub fn adjust_window_for_jumps(tau_day: usize, w_target: f64, calendar: &JumpCalendar, dates: &[NaiveDate], grid_step: f64, n_instants: usize) -> Result<WindowPlan, HarnessError> {
    if !(w_target > 0.0 && grid_step > 0.0) {
        return Err(HarnessError::Config("window and grid step must be positive".into()));
    }
    if tau_day >= dates.len() {
        return Err(HarnessError::Data(format!("day {tau_day} is outside the data")));
    }
    let full = vec![w_target; n_instants];
    if calendar.is_empty() {
        return Ok(WindowPlan::Windows(full));
    }
    let reach = w_target.ceil() as usize + 1;
    let flag = |back: usize| -> Result<bool, HarnessError> {
        let date = tau_day.checked_sub(back).map(|d| dates[d]);
        date.and_then(|d| calendar.days.get(&d).copied()).ok_or_else(|| {
            HarnessError::Data(format!("jump calendar does not cover {} trading days before {}", back, dates[tau_day]))
        })
    };
    if flag(0)? || flag(1)? {
        return Ok(WindowPlan::Skip);
    }
    for back in 2..=reach {
        if flag(back)? {
            let since = (back - 1) as f64;
            return Ok(WindowPlan::Windows((0..n_instants).map(|i| w_target.min(since + i as f64 * grid_step)).collect()));
        }
    }
    Ok(WindowPlan::Windows(full))
}

/// Window-scale rule of the empirical pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EmpiricalKappa {
    Fixed { kappa: f64 },
    Feasible {
        #[serde(default)]
        fourier: Option<FourierConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConfig {
    pub ingest: IngestSpec,
    #[serde(default = "half")]
    pub beta: f64,
    #[serde(flatten)]
    pub kappa: EmpiricalKappa,
    /// Grid steps as multiples of the mesh.
    pub grid_multiples: Vec<usize>,
    #[serde(default = "minus_half")]
    pub b: f64,
    #[serde(default = "quarter")]
    pub c: f64,
}

fn half() -> f64 {
    0.5
}

fn minus_half() -> f64 {
    -0.5
}

fn quarter() -> f64 {
    0.25
}

impl EmpiricalConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.ingest.validate()?;
        if !(self.beta >= 0.5) {
            return Err(HarnessError::Config("beta: must be at least 1/2".into()));
        }
        if let EmpiricalKappa::Fixed { kappa } = self.kappa {
            if !(kappa > 0.0) {
                return Err(HarnessError::Config("kappa: must be positive".into()));
            }
        }
        let n = self.ingest.steps_per_day();
        if self.grid_multiples.is_empty() || self.grid_multiples.iter().any(|&g| g == 0 || g > n) {
            return Err(HarnessError::Config("grid_multiples: must be positive and at most one day".into()));
        }
        if !(self.b > -1.0 && self.b <= 0.0 && self.c > 0.0 && self.c < 1.0) {
            return Err(HarnessError::Config("rates: b must lie in (-1, 0] and c in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One day and grid step of the empirical series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRow {
    pub date: NaiveDate,
    pub day: usize,
    pub grid_seconds: u64,
    pub kappa: f64,
    /// Target window (minutes) before the jump rule.
    pub w_minutes: f64,
    /// Whether the jump rule shortened any window.
    pub shortened: bool,
    pub psrv: Option<f64>,
    pub skip_reason: Option<String>,
}

/// Spot-variance reconstruction and vol-of-vol of one block of days.
struct Block {
    first_day: usize,
    last_day: usize,
    vol: Option<sde::VolPath>,
    gamma_hat: f64,
}

/// Blocks of `days_per_year` days; a trailing block shorter than half a year joins the one
/// before it.
fn year_blocks(n_days: usize, per_year: usize) -> Vec<(usize, usize)> {
    let per_year = per_year.max(1);
    let mut out: Vec<(usize, usize)> = (0..n_days).step_by(per_year).map(|s| (s, (s + per_year).min(n_days))).collect();
    if out.len() > 1 {
        let (s, e) = out[out.len() - 1];
        if 2 * (e - s) < per_year {
            out.pop();
            out.last_mut().expect("at least one block").1 = e;
        }
    }
    out
}

fn fit_block(data: &TickData, cfg: &EmpiricalConfig, first_day: usize, last_day: usize) -> Result<Block, HarnessError> {
    let EmpiricalKappa::Feasible { fourier } = &cfg.kappa else {
        return Ok(Block { first_day, last_day, vol: None, gamma_hat: f64::NAN });
    };
    let n = data.steps_per_day;
    let (a, b) = (first_day * n, last_day * n);
    let grid = PathGrid::new(data.path.grid.time(a), data.path.grid.dt, b - a)?;
    let sub = LogPricePath::new(grid, data.path.values[a..=b].to_vec())?;
    let data_err = |e: spotvol::SpotVolError| HarnessError::Data(e.to_string());
    let fc = match fourier {
        Some(c) => *c,
        None => FourierConfig::per_period(b - a, last_day - first_day).map_err(data_err)?,
    };
    let vol = fourier_spot_vol(&sub, &fc).map_err(data_err)?;
    let fit = indirect_inference(&vol, cfg.beta).map_err(data_err)?;
    Ok(Block { first_day, last_day, vol: Some(vol), gamma_hat: fit.gamma_hat })
}

/// Daily PSRV at every configured grid step, with `γ̂` fitted once per year of data and the
/// spot variance re-estimated at the start of each day. Without explicit cutoffs the
/// reconstruction grid has one point per trading day.
pub fn run_empirical(data: &TickData, calendar: &JumpCalendar, cfg: &EmpiricalConfig) -> Result<Vec<EmpiricalRow>, HarnessError> {
    cfg.validate()?;
    if data.steps_per_day != cfg.ingest.steps_per_day() || data.mesh_seconds != cfg.ingest.mesh_seconds {
        return Err(HarnessError::Config("ingest: data were resampled with a different mesh".into()));
    }
    let n = data.steps_per_day;
    let delta = data.path.grid.dt;
    let day = data.year.day();
    let mut rows = Vec::new();
    for (first, last) in year_blocks(data.dates.len(), cfg.ingest.days_per_year.round() as usize) {
        let block = fit_block(data, cfg, first, last)?;
        for d in block.first_day..block.last_day {
            let tau = data.path.grid.time(d * n);
            let kappa = match (&cfg.kappa, &block.vol) {
                (EmpiricalKappa::Fixed { kappa }, _) => *kappa,
                (EmpiricalKappa::Feasible { .. }, Some(vol)) => {
                    kappa_from(nearest(vol, tau).max(spotvol::VARIANCE_FLOOR), block.gamma_hat, cfg.beta)
                        .map_err(|e| HarnessError::Data(e.to_string()))?
                }
                (EmpiricalKappa::Feasible { .. }, None) => unreachable!(),
            };
            for &g in &cfg.grid_multiples {
                let tuning = Tuning { delta_n: delta, b: cfg.b, c: cfg.c, kappa, lambda: g as f64 * delta.powf(1.0 - cfg.c), h: day, tau };
                tuning.validate()?;
                let (k, lam, inc) = (tuning.k_n(), tuning.lambda_n(), tuning.n_increments());
                let mut row = EmpiricalRow {
                    date: data.dates[d],
                    day: d,
                    grid_seconds: g as u64 * data.mesh_seconds,
                    kappa,
                    w_minutes: (k as u64 * data.mesh_seconds) as f64 / 60.0,
                    shortened: false,
                    psrv: None,
                    skip_reason: None,
                };
                let plan = adjust_window_for_jumps(d, k as f64 / n as f64, calendar, &data.dates, lam as f64 / n as f64, inc + 1);
                match plan {
                    Err(HarnessError::Data(_)) => row.skip_reason = Some("calendar".into()),
                    Err(e) => return Err(e),
                    Ok(WindowPlan::Skip) => row.skip_reason = Some("jump".into()),
                    Ok(WindowPlan::Windows(w)) => {
                        let counts: Vec<usize> = w.iter().map(|x| ((x * n as f64).round() as usize).max(1)).collect();
                        row.shortened = counts.iter().any(|&c| c < k);
                        match psrv_with_windows(&data.path, d * n, lam, &counts) {
                            Ok(v) => row.psrv = Some(v),
                            Err(reason) => row.skip_reason = Some(reason.into()),
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// `Σ (σ̂²(t_i) − σ̂²(t_{i−1}))²` over instants `start + i·λ` with window `counts[i]` at instant `i`.
fn psrv_with_windows(path: &LogPricePath, start: usize, lambda_n: usize, counts: &[usize]) -> Result<f64, &'static str> {
    let last = start + (counts.len() - 1) * lambda_n;
    if last > path.grid.n_steps {
        return Err("horizon");
    }
    let at = |i: usize| local_avg_rv(path, path.grid.time(start + i * lambda_n), counts[i]).map_err(|_| "window");
    let mut prev = at(0)?;
    let mut value = 0.0;
    for i in 1..counts.len() {
        let cur = at(i)?;
        let d = cur - prev;
        value += d * d;
        prev = cur;
    }
    Ok(value)
}
