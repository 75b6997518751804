use chrono::{NaiveDate, NaiveTime};

use biascalc::{bias_closed_form, expected_qv};
use estimator::Tuning;
use harness::config::{KappaMode, Model, ParamSet, Sampling, ScenarioConfig, TuningSpec, YearLayout};
use harness::empirical::{run_empirical, ticks_from_path, EmpiricalConfig, EmpiricalKappa, IngestSpec, JumpCalendar};
use harness::scenario::{cells, path_days, run_scenario, simulate_path};
use harness::sweep::bias_sweep;
use harness::thresholds::{threshold_curves, NamedSet, ThresholdConfig, ThresholdKind};

const BASELINE: ParamSet = ParamSet { alpha: 0.2, theta: 5.0, gamma: 0.5, nu0: 0.2, rho: -0.2, mu: 0.0 };

fn small(kappa: KappaMode) -> ScenarioConfig {
    ScenarioConfig {
        name: "small".into(),
        seed: 3,
        n_paths: 4,
        model: Model::Cir,
        params: BASELINE,
        noise: None,
        year: YearLayout::default(),
        sampling: Sampling {
            sim_step_seconds: 5,
            price_mesh_seconds: vec![60],
            grid_multiples: vec![1, 2],
            eval_days: 5,
            warmup_days: None,
            horizon_days: 1.0,
        },
        tuning: TuningSpec { kappa, b: -0.5, c: 0.25 },
    }
}

#[test]
fn cells_are_ordered_by_mesh_then_scale_then_grid() {
    let mut cfg = small(KappaMode::Fixed { kappa: vec![2.0, 1.0] });
    cfg.sampling.price_mesh_seconds = vec![60, 30];
    let c = cells(&cfg);
    assert_eq!(c.len(), 8);
    assert_eq!((c[0].mesh_seconds, c[0].kappa, c[0].grid_multiple), (60, Some(2.0), 1));
    assert_eq!((c[1].mesh_seconds, c[1].kappa, c[1].grid_multiple), (60, Some(2.0), 2));
    assert_eq!((c[2].mesh_seconds, c[2].kappa), (60, Some(1.0)));
    assert_eq!(c[4].mesh_seconds, 30);
}

#[test]
fn scenario_rows_are_complete() {
    let t = run_scenario(&small(KappaMode::Oracle), Some(2)).unwrap();
    assert_eq!(t.rows.len(), 2);
    for r in &t.rows {
        assert_eq!(r.n_paths, 4);
        assert_eq!(r.days_used + r.days_skipped, 20);
        assert!(r.mean_rel_bias.is_finite() && r.std_error > 0.0);
        assert_eq!(r.big_delta_seconds, 60 * r.grid_multiple as u64);
    }
}

#[test]
fn oracle_scale_uses_the_variance_at_the_day_start() {
    let cfg = small(KappaMode::Oracle);
    let sim = simulate_path(&cfg, 1).unwrap();
    let days = path_days(&cfg, 1).unwrap();
    for rec in days.iter().filter(|r| r.cell == 0) {
        let tau = cfg.day_start(rec.day);
        let nu = sim.vol.values[sim.vol.grid.floor_index(tau).unwrap()];
        assert!((rec.kappa - 2.0 * nu.sqrt() / 0.5).abs() < 1e-12);
    }
}

#[test]
fn sweep_overlay_equals_the_closed_form() {
    let mut cfg = small(KappaMode::Fixed { kappa: vec![1.5] });
    cfg.n_paths = 2;
    cfg.sampling.eval_days = 2;
    let rows = bias_sweep(&cfg, Some(1)).unwrap();
    let p = BASELINE.cir();
    for r in &rows {
        let delta = cfg.year.seconds(60.0);
        let mean: f64 = (0..2)
            .map(|d| {
                let t = Tuning { delta_n: delta, b: -0.5, c: 0.25, kappa: 1.5, lambda: r.lambda, h: cfg.horizon(), tau: cfg.day_start(d) };
                bias_closed_form(&p, &t, None).unwrap().total / expected_qv(&p, t.tau, t.effective_horizon())
            })
            .sum::<f64>()
            / 2.0;
        assert!((r.closed_form_rel - mean).abs() <= 1e-12 * mean.abs());
        assert!(r.leading_rel.is_finite());
    }
    assert!(bias_sweep(&small(KappaMode::Oracle), None).is_err());
}

fn empirical_config(kappa: f64) -> EmpiricalConfig {
    EmpiricalConfig {
        ingest: IngestSpec::new(60, 21_600),
        beta: 0.5,
        kappa: EmpiricalKappa::Fixed { kappa },
        grid_multiples: vec![1, 2],
        b: -0.5,
        c: 0.25,
    }
}

#[test]
fn empirical_pipeline_reproduces_scenario_days() {
    let cfg = small(KappaMode::Fixed { kappa: vec![1.5] });
    let sim = simulate_path(&cfg, 0).unwrap();
    let obs = sde::subsample(&sim.observed, 12).unwrap();
    let ticks = ticks_from_path(&obs, 360, 60, NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(), NaiveTime::MIN, cfg.year).unwrap();
    let rows = run_empirical(&ticks, &JumpCalendar::default(), &empirical_config(1.5)).unwrap();
    let warmup = cfg.warmup_days();
    let mut compared = 0;
    for rec in path_days(&cfg, 0).unwrap() {
        let g = [1u64, 2][rec.cell];
        let row = rows.iter().find(|r| r.day == warmup + rec.day && r.grid_seconds == 60 * g).unwrap();
        let (a, b) = (row.psrv.unwrap(), rec.psrv.unwrap());
        assert!((a - b).abs() <= 1e-10 * b, "day {}: {a} vs {b}", rec.day);
        compared += 1;
    }
    assert_eq!(compared, 10);
}

#[test]
fn daily_series_at_neighbouring_grid_steps_agree() {
    let mut cfg = small(KappaMode::Fixed { kappa: vec![1.5] });
    cfg.sampling.eval_days = 40;
    let sim = simulate_path(&cfg, 2).unwrap();
    let obs = sde::subsample(&sim.observed, 12).unwrap();
    let ticks = ticks_from_path(&obs, 360, 60, NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(), NaiveTime::MIN, cfg.year).unwrap();
    let rows = run_empirical(&ticks, &JumpCalendar::default(), &empirical_config(1.5)).unwrap();
    let series = |g: u64| -> Vec<f64> { rows.iter().filter(|r| r.grid_seconds == g).filter_map(|r| r.psrv).collect() };
    let (x, y) = (series(60), series(120));
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let corr = cov / (vx * vy).sqrt();
    assert!(corr > 0.95, "correlation {corr}");
}

#[test]
fn threshold_rows_cover_the_grid() {
    let cfg = ThresholdConfig {
        sets: vec![NamedSet { name: "baseline".into(), params: BASELINE }],
        year: YearLayout::default(),
        tau_days: 0.0,
        horizon_days: 1.0,
        n_points: 10,
        overlap_lambdas: vec![0.0006],
        c: 0.25,
    };
    let rows = threshold_curves(&cfg).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows[..10].iter().all(|r| r.kind == ThresholdKind::NoOverlap && r.delta_star_seconds > 0.0));
    assert!((rows[9].lambda - rows[9].lambda_star).abs() < 1e-15);
    let last = &rows[10];
    assert_eq!(last.kind, ThresholdKind::Overlap);
    assert!((last.delta_star_seconds / (last.delta_star_years * 5_443_200.0) - 1.0).abs() < 1e-12);
}
