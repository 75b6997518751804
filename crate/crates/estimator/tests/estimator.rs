use estimator::{ceil_count, local_avg_rv, psrv, true_qv, EstimatorError, Tuning};
use proptest::prelude::*;
use sde::{LogPricePath, PathGrid, VolPath};

/// A path whose squared returns are `1, 4, 9, ...` times the mesh.
fn ramp_path(n: usize, dt: f64) -> LogPricePath {
    let mut p = vec![0.0];
    for i in 1..=n {
        p.push(p[i - 1] + (i as f64) * dt.sqrt());
    }
    LogPricePath::new(PathGrid::from_zero(dt, n).unwrap(), p).unwrap()
}

/// Direct evaluation from the definitions, used as an independent check.
fn psrv_by_definition(path: &LogPricePath, start: usize, k: usize, lam: usize, n: usize) -> f64 {
    let r: Vec<f64> = path.returns();
    let larv = |end: usize| (end - k..end).map(|j| r[j] * r[j]).sum::<f64>() / (k as f64 * path.grid.dt);
    (1..=n).map(|i| (larv(start + i * lam) - larv(start + (i - 1) * lam)).powi(2)).sum()
}

#[test]
fn counts_follow_the_rate_rules() {
    let t = Tuning { delta_n: 1e-4, b: -0.5, c: 0.25, kappa: 2.0, lambda: 0.001, h: 0.01, tau: 0.0 };
    assert_eq!(t.k_n(), 200);
    // λ·δ^{c−1} = 0.001·1e3 = 1.
    assert_eq!(t.lambda_n(), 1);
    assert_eq!(t.n_increments(), 100);
    assert!(t.overlaps());
    let t = Tuning::from_counts(1e-4, -0.5, 0.25, 3, 5, 0.01, 0.0);
    assert_eq!((t.k_n(), t.lambda_n()), (3, 5));
    assert!(!t.overlaps());
    assert_eq!(Tuning::from_counts(1e-4, -0.5, 0.25, 5, 5, 0.01, 0.0).overlaps(), false);
    assert!((t.effective_horizon() - 20.0 * 5e-4).abs() < 1e-15);
}

#[test]
fn grid_step_is_capped_at_the_horizon() {
    let t = Tuning { delta_n: 0.01, b: -0.5, c: 0.25, kappa: 1.0, lambda: 100.0, h: 0.1, tau: 0.0 };
    assert_eq!(t.lambda_n(), 10);
    assert_eq!(t.n_increments(), 1);
}

#[test]
fn tuning_validation_names_the_problem() {
    let ok = Tuning { delta_n: 1e-4, b: -0.5, c: 0.25, kappa: 1.0, lambda: 1.0, h: 0.01, tau: 0.0 };
    assert!(ok.validate().is_ok());
    for bad in [Tuning { b: 0.5, ..ok }, Tuning { c: 1.0, ..ok }, Tuning { kappa: 0.0, ..ok }, Tuning { h: -1.0, ..ok }] {
        assert!(matches!(bad.validate(), Err(EstimatorError::Tuning(_))));
    }
}

#[test]
fn local_average_uses_returns_ending_at_t() {
    let path = ramp_path(10, 0.5);
    // Returns 3, 4, 5 squared are 9, 16, 25 times the mesh.
    let v = local_avg_rv(&path, path.grid.time(5), 3).unwrap();
    assert!((v - 50.0 / 3.0).abs() < 1e-12);
    // Off-grid times floor to the previous point.
    assert_eq!(local_avg_rv(&path, path.grid.time(5) + 0.2, 3).unwrap(), v);
    assert!(matches!(local_avg_rv(&path, path.grid.time(2), 3), Err(EstimatorError::Coverage { .. })));
}

#[test]
fn psrv_matches_definition_in_both_regimes() {
    let dt = 1e-4;
    let path = ramp_path(400, dt);
    for (k, lam) in [(3usize, 5usize), (12, 4), (4, 4)] {
        let t = Tuning::from_counts(dt, -0.5, 0.25, k, lam, 200.0 * dt, 20.0 * dt);
        let r = psrv(&path, &t).unwrap();
        let n = 200 / lam;
        assert_eq!(r.n_increments, n);
        assert_eq!(r.overlap, k > lam);
        let want = psrv_by_definition(&path, 20, k, lam, n);
        assert!((r.value - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn psrv_reports_missing_coverage() {
    let dt = 1e-4;
    let path = ramp_path(100, dt);
    let t = Tuning::from_counts(dt, -0.5, 0.25, 10, 5, 50.0 * dt, 5.0 * dt);
    assert!(matches!(psrv(&path, &t), Err(EstimatorError::Coverage { .. })));
    let t = Tuning::from_counts(dt, -0.5, 0.25, 10, 5, 95.0 * dt, 10.0 * dt);
    assert!(matches!(psrv(&path, &t), Err(EstimatorError::Coverage { .. })));
}

#[test]
fn true_qv_sums_fine_increments() {
    let vol = VolPath::new(PathGrid::from_zero(0.1, 5).unwrap(), vec![1.0, 2.0, 4.0, 3.0, 3.0, 5.0]).unwrap();
    assert_eq!(true_qv(&vol, 0.1, 0.3).unwrap(), 4.0 + 1.0 + 0.0);
    assert_eq!(true_qv(&vol, 0.0, 0.5).unwrap(), 1.0 + 4.0 + 1.0 + 0.0 + 4.0);
    assert!(true_qv(&vol, 0.3, 1.0).is_err());
}

#[test]
fn constant_variance_gives_zero_psrv() {
    let dt: f64 = 1e-4;
    let p: Vec<f64> = (0..=300).map(|i| (i % 2) as f64 * dt.sqrt()).collect();
    let path = LogPricePath::new(PathGrid::from_zero(dt, 300).unwrap(), p).unwrap();
    let t = Tuning::from_counts(dt, -0.5, 0.25, 6, 2, 200.0 * dt, 50.0 * dt);
    assert_eq!(psrv(&path, &t).unwrap().value, 0.0);
}

proptest! {
    #[test]
    fn ceil_count_tolerates_rounding(n in 1usize..1_000_000, eps in -1e-12f64..1e-12) {
        prop_assert_eq!(ceil_count(n as f64 * (1.0 + eps)), n);
        prop_assert_eq!(ceil_count(n as f64 + 0.25), n + 1);
    }

    #[test]
    fn from_counts_round_trips(k in 1usize..5000, lam in 1usize..50, mesh_s in 1.0f64..600.0) {
        let delta = sde::seconds(mesh_s);
        let t = Tuning::from_counts(delta, -0.5, 0.25, k, lam, sde::days(1.0), 0.0);
        prop_assume!(lam <= t.n_obs());
        prop_assert_eq!(t.k_n(), k);
        prop_assert_eq!(t.lambda_n(), lam);
    }
}
