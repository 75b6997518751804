//! Built-in property checks: agreement of the two exact bias routes and cancellation of the
//! leading bias by the optimal window scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use biascalc::{bias_closed_form, bias_moment_assembly, expected_qv, kappa_star_general, leading_term_general};
use estimator::Tuning;
use sde::CirParams;

/// Parameter sets used by the checks: two stationary starts and one transient.
pub const PARAM_SETS: [(f64, f64, f64, f64); 3] = [(0.2, 5.0, 0.5, 0.2), (0.03, 10.0, 0.25, 0.03), (0.2, 5.0, 0.5, 0.4)];

/// Relative tolerance between the two routes.
pub const ROUTE_TOL: f64 = 1e-8;
/// Tolerance on the cancelled leading term relative to its diffusion part.
pub const ANNIHILATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
}

/// A random tuning on a one-day horizon: mesh of 1 s to 5 min, window of 1 to 400 steps and
/// grid of 1 to 30 steps, so both overlapping and disjoint windows occur.
pub fn random_tuning(rng: &mut impl Rng) -> Tuning {
    let delta = sde::seconds(*[1.0, 5.0, 15.0, 60.0, 300.0].get(rng.random_range(0..5)).expect("in range"));
    let k = rng.random_range(1..=400usize);
    let lambda_n = rng.random_range(1..=30usize);
    let day = sde::days(1.0);
    let n_max = ((day / (lambda_n as f64 * delta)).floor() as usize).clamp(1, 200);
    let n = rng.random_range(1..=n_max);
    let tau = rng.random_range(0.0..10.0) * day;
    Tuning::from_counts(delta, -0.5, 0.25, k, lambda_n, (n * lambda_n) as f64 * delta, tau)
}

/// Largest relative gap between the closed-form bias and the moment-assembly bias over
/// `cases` random configurations cycling through [`PARAM_SETS`].
pub fn route_equivalence(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let (al, th, ga, nu0) = PARAM_SETS[i % PARAM_SETS.len()];
        let p = CirParams::new(al, th, ga, nu0).expect("valid set");
        let t = random_tuning(&mut rng);
        let gap = match (bias_closed_form(&p, &t, None), bias_moment_assembly(&p, &t)) {
            (Ok(cf), Ok(mom)) => {
                let via_moments = mom - expected_qv(&p, t.tau, t.effective_horizon());
                (via_moments - cf.total).abs() / cf.total.abs()
            }
            _ => f64::INFINITY,
        };
        worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    CheckResult { name: "route_equivalence".into(), pass: worst <= ROUTE_TOL, cases, worst, tolerance: ROUTE_TOL }
}

/// Largest leading term at the optimal scale, relative to its diffusion part, over random
/// `(ν, γ)` and each `β` in `betas`.
pub fn annihilation(cases: usize, seed: u64, betas: &[f64]) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let nu: f64 = rng.random_range(0.005..1.0);
        let gamma = rng.random_range(0.05..2.0);
        let delta = sde::seconds(rng.random_range(1.0..600.0));
        for &beta in betas {
            let diffusion_sq = gamma * gamma * nu.powf(2.0 * beta);
            let lead = kappa_star_general(nu, gamma, beta).and_then(|kappa| {
                let t = Tuning { delta_n: delta, b: -0.5, c: 0.25, kappa, lambda: delta.powf(0.75), h: sde::days(1.0), tau: 0.0 };
                leading_term_general(nu, diffusion_sq, &t)
            });
            let rel = lead.map_or(f64::INFINITY, |l| l.abs() / (diffusion_sq * sde::days(1.0)));
            worst = worst.max(rel);
        }
    }
    CheckResult { name: "annihilation".into(), pass: worst <= ANNIHILATION_TOL, cases: cases * betas.len(), worst, tolerance: ANNIHILATION_TOL }
}

/// The full suite run by the `selftest` subcommand.
pub fn run_selftest(seed: u64) -> Vec<CheckResult> {
    vec![route_equivalence(200, seed), annihilation(100, seed, &[0.5, 1.0, 1.5])]
}
