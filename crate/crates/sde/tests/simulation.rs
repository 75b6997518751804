use proptest::prelude::*;
use rayon::prelude::*;
use sde::{
    add_noise, resolve_noise, seconds, simulate_cir, simulate_ckls, subsample, CirParams, CklsParams, LogPricePath,
    NoiseSpec, PathGrid, SdeError, StreamSeed,
};

fn baseline() -> CirParams {
    CirParams::new(0.2, 5.0, 0.5, 0.4).unwrap()
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
}

#[test]
fn rejects_feller_violation_and_bad_inputs() {
    assert!(matches!(CirParams::new(0.01, 1.0, 0.5, 0.1), Err(SdeError::Parameter { name: "gamma", .. })));
    assert!(matches!(CirParams::new(-0.1, 1.0, 0.1, 0.1), Err(SdeError::Parameter { name: "alpha", .. })));
    assert!(PathGrid::from_zero(0.0, 10).is_err());
    assert!(PathGrid::from_zero(1.0, 0).is_err());
    let ckls = CklsParams { beta: 0.3, ..CklsParams::from_cir(baseline(), 0.0, 0.0) };
    assert!(ckls.validate().is_err());
    let ckls = CklsParams { rho: 1.5, ..CklsParams::from_cir(baseline(), 0.0, 0.0) };
    assert!(ckls.validate().is_err());
    assert!(NoiseSpec::Ratio { zeta: -1.0 }.validate().is_err());
}

#[test]
fn exact_transition_matches_conditional_moments() {
    let p = baseline();
    let dt = 0.05;
    let grid = PathGrid::from_zero(dt, 1).unwrap();
    let ends: Vec<f64> = (0..40_000u64).into_par_iter().map(|i| simulate_cir(&p, &grid, StreamSeed::new(7, i)).unwrap().values[1]).collect();
    let (m, v) = mean_var(&ends);
    let decay = (-p.theta * dt).exp();
    let mean = p.mean_at(dt);
    let var = p.nu0 * p.gamma * p.gamma * decay * (1.0 - decay) / p.theta
        + p.alpha * p.gamma * p.gamma * (1.0 - decay).powi(2) / (2.0 * p.theta);
    let se = (var / ends.len() as f64).sqrt();
    assert!((m - mean).abs() < 4.0 * se, "mean {m} vs {mean}");
    assert!((v - var).abs() / var < 0.03, "variance {v} vs {var}");
}

#[test]
fn square_root_leg_is_shared_between_simulators() {
    let p = baseline();
    let grid = PathGrid::from_zero(seconds(30.0), 500).unwrap();
    let vol = simulate_cir(&p, &grid, StreamSeed::new(3, 9)).unwrap();
    let (vol2, price) = simulate_ckls(&CklsParams::from_cir(p, 0.0, -0.5), &grid, StreamSeed::new(3, 9)).unwrap();
    assert_eq!(vol, vol2);
    assert_eq!(price.values[0], 0.0);
    assert_eq!(price.values.len(), 501);
}

#[test]
fn streams_are_independent_of_order() {
    let p = CklsParams::from_cir(baseline(), 0.05, -0.2);
    let grid = PathGrid::from_zero(seconds(60.0), 200).unwrap();
    let serial: Vec<_> = (0..8u64).map(|i| simulate_ckls(&p, &grid, StreamSeed::new(5, i)).unwrap()).collect();
    let parallel: Vec<_> = (0..8u64).rev().collect::<Vec<_>>().into_par_iter().map(|i| simulate_ckls(&p, &grid, StreamSeed::new(5, i)).unwrap()).collect();
    for (a, b) in serial.iter().zip(parallel.iter().rev()) {
        assert_eq!(a, b);
    }
    assert_ne!(serial[0].1, serial[1].1);
}

#[test]
fn log_price_increments_carry_integrated_variance() {
    let p = CklsParams::from_cir(CirParams::new(0.2, 5.0, 0.5, 0.2).unwrap(), 0.0, 0.0);
    let grid = PathGrid::from_zero(seconds(60.0), 360).unwrap();
    let (rv, iv): (Vec<f64>, Vec<f64>) = (0..2000u64)
        .into_par_iter()
        .map(|i| {
            let (vol, px) = simulate_ckls(&p, &grid, StreamSeed::new(11, i)).unwrap();
            let rv = px.returns().iter().map(|r| r * r).sum::<f64>();
            let iv = vol.values[..360].iter().sum::<f64>() * grid.dt;
            (rv, iv)
        })
        .unzip();
    let (m_rv, v_rv) = mean_var(&rv);
    let (m_iv, _) = mean_var(&iv);
    assert!((m_rv - m_iv).abs() < 4.0 * (v_rv / rv.len() as f64).sqrt());
}

#[test]
fn ckls_variance_stays_nonnegative() {
    for beta in [1.0, 1.5] {
        let p = CklsParams { beta, gamma: 2.0, ..CklsParams::from_cir(baseline(), 0.0, 0.0) };
        let grid = PathGrid::from_zero(seconds(60.0), 5000).unwrap();
        let (vol, _) = simulate_ckls(&p, &grid, StreamSeed::new(1, 0)).unwrap();
        assert!(vol.values.iter().all(|v| *v >= 0.0 && v.is_finite()));
    }
}

#[test]
fn ratio_noise_calibrates_to_one_second_variance() {
    let grid = PathGrid::from_zero(seconds(1.0), 20_000).unwrap();
    let (_, px) = simulate_ckls(&CklsParams::from_cir(CirParams::new(0.2, 5.0, 0.5, 0.2).unwrap(), 0.0, 0.0), &grid, StreamSeed::new(2, 0)).unwrap();
    let m = resolve_noise(&px, &NoiseSpec::Ratio { zeta: 2.0 }).unwrap();
    let (_, var) = mean_var(&px.returns());
    assert!((m.v_eta - 2.0 * var).abs() / m.v_eta < 1e-12);
    assert_eq!(m.q_eta, 3.0 * m.v_eta * m.v_eta);
    // A coarser mesh sees about the same per-second variance.
    let coarse = resolve_noise(&subsample(&px, 10).unwrap(), &NoiseSpec::Ratio { zeta: 2.0 }).unwrap();
    assert!((coarse.v_eta / m.v_eta - 1.0).abs() < 0.1);
    let noisy = add_noise(&px, &NoiseSpec::Moments { v_eta: 1e-6, q_eta: 3e-12 }, StreamSeed::new(2, 0)).unwrap();
    let diffs: Vec<f64> = noisy.values.iter().zip(&px.values).map(|(a, b)| a - b).collect();
    let (_, v) = mean_var(&diffs);
    assert!((v / 1e-6 - 1.0).abs() < 0.05);
    assert_eq!(add_noise(&px, &NoiseSpec::Ratio { zeta: 0.0 }, StreamSeed::new(2, 0)).unwrap(), px);
}

proptest! {
    #[test]
    fn subsampling_keeps_every_stride_point(n in 1usize..200, stride in 1usize..20) {
        prop_assume!(stride <= n);
        let grid = PathGrid::from_zero(0.5, n).unwrap();
        let path = LogPricePath::new(grid, (0..=n).map(|i| i as f64).collect()).unwrap();
        let thin = subsample(&path, stride).unwrap();
        prop_assert_eq!(thin.values.len(), n / stride + 1);
        for (j, v) in thin.values.iter().enumerate() {
            prop_assert_eq!(*v, (j * stride) as f64);
            prop_assert!((thin.grid.time(j) - path.grid.time(j * stride)).abs() < 1e-12);
        }
    }

    #[test]
    fn floor_index_lands_on_grid_points(dt in 1e-6f64..1.0, n in 1usize..10_000, i in 0usize..10_000) {
        prop_assume!(i <= n);
        let grid = PathGrid::new(0.25, dt, n).unwrap();
        prop_assert_eq!(grid.floor_index(grid.time(i)), Some(i));
    }
}
