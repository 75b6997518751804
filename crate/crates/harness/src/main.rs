use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{NaiveDate, NaiveTime};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use harness::empirical::{ingest_csv, run_empirical, ticks_from_path, EmpiricalConfig, JumpCalendar};
use harness::output::{write_rows, Format, Metadata};
use harness::scenario::{run_scenario, simulate_path};
use harness::selftest::run_selftest;
use harness::sweep::bias_sweep;
use harness::thresholds::{threshold_curves, ThresholdConfig};
use harness::{HarnessError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "harness", version, about = "PSRV bias experiments and empirical pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the number of paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Writes simulated observed prices (and the variance) at the first price mesh.
    Simulate(Common),
    /// Monte Carlo bias table.
    Scenario(Common),
    /// Bias over fixed window scales and grid steps with closed-form overlays.
    Sweep(Common),
    /// Threshold meshes for each parameter set.
    Thresholds(Common),
    /// Daily PSRV series from a price file.
    Empirical {
        #[command(flatten)]
        common: Common,
        /// `timestamp,price` file.
        #[arg(long)]
        prices: PathBuf,
        /// `date,has_jump` file; no jumps when omitted.
        #[arg(long)]
        calendar: Option<PathBuf>,
    },
    /// Route-equivalence and cancellation checks.
    Selftest(Common),
}

fn read_config(common: &Common) -> Result<String, HarnessError> {
    let path = common.config.as_ref().ok_or_else(|| HarnessError::Config("--config is required".into()))?;
    fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn scenario_config(common: &Common) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = ScenarioConfig::from_toml(&read_config(common)?)?;
    if let Some(p) = common.paths {
        cfg.n_paths = p;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Writes the rows and the metadata sidecar.
fn emit<T: Serialize, C: Serialize>(common: &Common, name: &str, rows: &[T], seed: Option<u64>, config: &C) -> Result<(), HarnessError> {
    fs::create_dir_all(&common.out_dir)?;
    let file = format!("{name}.{}", extension(common.format));
    let meta = Metadata::new(name, seed, config, vec![file.clone()]);
    write_rows(rows, &meta.config_sha256, common.format, BufWriter::new(File::create(common.out_dir.join(&file))?))?;
    meta.write(BufWriter::new(File::create(common.out_dir.join(format!("{name}.meta.json")))?))?;
    eprintln!("wrote {}", common.out_dir.join(file).display());
    Ok(())
}

fn open(path: &Path) -> Result<File, HarnessError> {
    File::open(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))
}

fn simulate(common: &Common) -> Result<(), HarnessError> {
    let mut cfg = scenario_config(common)?;
    if common.paths.is_none() {
        cfg.n_paths = 1;
    }
    fs::create_dir_all(&common.out_dir)?;
    let mesh = cfg.sampling.price_mesh_seconds[0];
    let stride = (mesh / cfg.sampling.sim_step_seconds) as usize;
    let steps = (cfg.year.day_seconds() / mesh as f64).round() as usize;
    let first = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut files = Vec::new();
    for i in 0..cfg.n_paths {
        let sim = simulate_path(&cfg, i)?;
        let obs = sde::subsample(&sim.observed, stride)?;
        let vol = sim.vol.subsample(stride)?;
        let ticks = ticks_from_path(&obs, steps, mesh, first, NaiveTime::MIN, cfg.year)?;
        let file = format!("path_{i:04}.csv");
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(common.out_dir.join(&file))?));
        let io = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
        w.write_record(["timestamp", "price", "variance"]).map_err(io)?;
        for (j, p) in ticks.prices.iter().enumerate() {
            w.write_record([ticks.timestamp(j).format("%Y-%m-%dT%H:%M:%S").to_string(), p.to_string(), vol.values[j].to_string()]).map_err(io)?;
        }
        w.flush()?;
        files.push(file);
    }
    let meta = Metadata::new("simulate", Some(cfg.seed), &cfg, files);
    meta.write(BufWriter::new(File::create(common.out_dir.join("simulate.meta.json"))?))
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Simulate(common) => simulate(&common)?,
        Command::Scenario(common) => {
            let cfg = scenario_config(&common)?;
            let table = run_scenario(&cfg, common.workers)?;
            emit(&common, "scenario", &table.rows, Some(cfg.seed), &cfg)?;
        }
        Command::Sweep(common) => {
            let cfg = scenario_config(&common)?;
            let rows = bias_sweep(&cfg, common.workers)?;
            emit(&common, "sweep", &rows, Some(cfg.seed), &cfg)?;
        }
        Command::Thresholds(common) => {
            let cfg = ThresholdConfig::from_toml(&read_config(&common)?)?;
            let rows = threshold_curves(&cfg)?;
            emit(&common, "thresholds", &rows, None, &cfg)?;
        }
        Command::Empirical { common, prices, calendar } => {
            let cfg = EmpiricalConfig::from_toml(&read_config(&common)?)?;
            let data = ingest_csv(open(&prices)?, &cfg.ingest)?;
            let cal = match calendar {
                Some(p) => JumpCalendar::from_csv(open(&p)?)?,
                None => JumpCalendar::default(),
            };
            eprintln!("{} days, {} grid points filled from earlier ticks", data.dates.len(), data.gaps);
            let rows = run_empirical(&data, &cal, &cfg)?;
            emit(&common, "empirical", &rows, None, &cfg)?;
        }
        Command::Selftest(common) => {
            let results = run_selftest(common.seed.unwrap_or(1));
            let mut ok = true;
            for r in &results {
                println!("{} {}: worst {:.3e} (tolerance {:.0e}, {} cases)", if r.pass { "PASS" } else { "FAIL" }, r.name, r.worst, r.tolerance, r.cases);
                ok &= r.pass;
            }
            if !ok {
                return Ok(ExitCode::from(4));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
