use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::SdeError;
use crate::params::{CirParams, CklsParams};
use crate::path::{LogPricePath, PathGrid, VolPath};
use crate::rng::{StreamSeed, LEG_PRICE, LEG_VARIANCE};

/// Exact transition of the CIR process over a fixed step.
///
/// `ν(t+dt) = c·X` with `X` noncentral chi-square with `d = 4θα/γ²` degrees of freedom and
/// noncentrality `ν(t)e^{−θdt}/c`. Feller's condition gives `d > 2`, so `X` is drawn as
/// `(Z + √λ)² + 2·Gamma((d − 1)/2)`.
struct CirStep {
    scale: f64,
    decay: f64,
    chi_rest: Gamma<f64>,
}

impl CirStep {
    fn new(p: &CirParams, dt: f64) -> Self {
        let g2 = p.gamma * p.gamma;
        let scale = g2 * (-(-p.theta * dt).exp_m1()) / (4.0 * p.theta);
        let dof = 4.0 * p.theta * p.alpha / g2;
        let chi_rest = Gamma::new(0.5 * (dof - 1.0), 2.0).expect("Feller condition gives a valid shape");
        Self { scale, decay: (-p.theta * dt).exp(), chi_rest }
    }

    #[inline]
    fn next<R: Rng + ?Sized>(&self, nu: f64, rng: &mut R) -> f64 {
        let ncp = nu * self.decay / self.scale;
        let z: f64 = rng.sample(StandardNormal);
        let centred = z + ncp.sqrt();
        self.scale * (centred * centred + self.chi_rest.sample(rng))
    }
}

/// Samples a CIR variance path from its exact transition law. The path starts at `nu0` at
/// `grid.t_start`.
pub fn simulate_cir(params: &CirParams, grid: &PathGrid, seed: StreamSeed) -> Result<VolPath, SdeError> {
    params.validate()?;
    PathGrid::new(grid.t_start, grid.dt, grid.n_steps)?;
    let mut rng = seed.leg(LEG_VARIANCE);
    let step = CirStep::new(params, grid.dt);
    let mut values = Vec::with_capacity(grid.n_steps + 1);
    let mut nu = params.nu0;
    values.push(nu);
    for _ in 0..grid.n_steps {
        nu = step.next(nu, &mut rng);
        values.push(nu);
    }
    Ok(VolPath { grid: *grid, values })
}

/// Simulates the CKLS variance and the log price it drives.
///
/// The variance uses exact CIR sampling when `beta = 1/2` (identical to [`simulate_cir`] for
/// the same seed) and full-truncation Euler otherwise, reporting the floored value. The log
/// price starts at zero and follows Euler steps with the left-point variance; with leverage,
/// the variance shock of each step enters the price increment through `ρ`.
pub fn simulate_ckls(
    params: &CklsParams,
    grid: &PathGrid,
    seed: StreamSeed,
) -> Result<(VolPath, LogPricePath), SdeError> {
    params.validate()?;
    PathGrid::new(grid.t_start, grid.dt, grid.n_steps)?;
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let rho = params.rho;
    let rho_perp = (1.0 - rho * rho).max(0.0).sqrt();
    let drift = params.mu * dt;

    let mut var_rng = seed.leg(LEG_VARIANCE);
    let mut price_rng = seed.leg(LEG_PRICE);
    let mut vol = Vec::with_capacity(grid.n_steps + 1);
    let mut price = Vec::with_capacity(grid.n_steps + 1);
    let mut nu = params.nu0;
    let mut p = 0.0;
    vol.push(nu);
    price.push(p);

    if params.is_cir() {
        let cir = params.cir();
        let step = CirStep::new(&cir, dt);
        let decay_drift = cir.theta * dt;
        for _ in 0..grid.n_steps {
            let next = step.next(nu, &mut var_rng);
            let b: f64 = price_rng.sample(StandardNormal);
            let mut dw = rho_perp * sqrt_dt * b;
            if rho != 0.0 {
                // Shock implied by the exact variance move.
                let dz = (next - nu - decay_drift * (cir.alpha - nu)) / (cir.gamma * nu.sqrt());
                dw += rho * dz;
            }
            p += drift + nu.sqrt() * dw;
            nu = next;
            vol.push(nu);
            price.push(p);
        }
    } else {
        let mut raw = nu;
        for _ in 0..grid.n_steps {
            let pos = raw.max(0.0);
            let z: f64 = var_rng.sample(StandardNormal);
            let b: f64 = price_rng.sample(StandardNormal);
            let dz = sqrt_dt * z;
            raw += params.theta * (params.alpha - pos) * dt + params.gamma * pos.powf(params.beta) * dz;
            p += drift + pos.sqrt() * (rho * dz + rho_perp * sqrt_dt * b);
            nu = raw.max(0.0);
            vol.push(nu);
            price.push(p);
        }
    }
    Ok((VolPath { grid: *grid, values: vol }, LogPricePath { grid: *grid, values: price }))
}
