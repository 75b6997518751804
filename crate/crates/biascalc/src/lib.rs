//! Exact finite-sample bias of the PSRV (realized variance of locally averaged spot-variance
//! estimates) under CIR variance dynamics, its asymptotic expansions and the tuning rules that
//! cancel the leading bias.
//!
//! Two independent routes give the expected PSRV: compact closed forms ([`bias_closed_form`])
//! and an assembly of window moments ([`bias_moment_assembly`]). Both are evaluated in
//! double-double arithmetic and agree to rounding.

mod closed_form;
mod dd;
mod expansion;
mod moments;
pub mod stable;

use estimator::Tuning;
use sde::{CirParams, NoiseMoments, SdeError};
use serde::{Deserialize, Serialize};

use closed_form::Setup;
pub use dd::Dd;
use moments::{Kernel, Layout};

pub use expansion::{
    expansion_coeffs, kappa_star, kappa_star_general, lambda_star, leading_bias_no_overlap,
    leading_term_general, leading_term_overlap, no_overlap_threshold, overlap_threshold_delta,
    ExpansionCoeffs, NoOverlapThreshold, RateBranch,
};

#[derive(Debug, thiserror::Error)]
pub enum BiasError {
    #[error(transparent)]
    Parameter(#[from] SdeError),
    #[error(transparent)]
    Tuning(#[from] estimator::EstimatorError),
    #[error("rates b = {b}, c = {c} satisfy neither admissible branch")]
    RateConstraint { b: f64, c: f64 },
    #[error("window {w} is within 1e-9 of the grid step {big_delta}; the overlap noise term is singular there")]
    Boundary { w: f64, big_delta: f64 },
    #[error("{0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, BiasError>;

/// `E[ν(τ)] = (ν0 − α)e^{−θτ} + α`.
pub fn e_nu_tau(params: &CirParams, tau: f64) -> f64 {
    params.mean_at(tau)
}

/// `E[⟨ν,ν⟩]` over `[τ, τ + h]`: `γ²αh + γ²(E[ν(τ)] − α)(1 − e^{−θh})/θ`.
pub fn expected_qv(params: &CirParams, tau: f64, h: f64) -> f64 {
    let g2 = params.gamma * params.gamma;
    let m = e_nu_tau(params, tau);
    g2 * params.alpha * h + g2 * (m - params.alpha) * stable::one_minus_exp_neg(params.theta * h) / params.theta
}

/// Terms of the exact bias `E[PSRV] − E[⟨ν,ν⟩]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasBreakdown {
    /// `γ²αh(A − 1)`.
    pub a_term: f64,
    /// `γ²(E[ν(τ)] − α)(1 − e^{−θh})/θ·(B − 1)`.
    pub b_term: f64,
    pub c_term: f64,
    /// Extra term of overlapping windows; zero when `W ≤ Δ`.
    pub o_term: f64,
    /// Noise term; zero without noise.
    pub d_term: f64,
    pub total: f64,
    pub factor_a: f64,
    pub factor_b: f64,
    /// Part of the noise term proportional to `h`.
    pub d_stationary: f64,
    /// Part of the noise term proportional to `E[ν(τ)] − α`.
    pub d_transient: f64,
    /// `E[ν(τ)]`.
    pub mean_at_start: f64,
    pub overlap: bool,
}

fn setup(params: &CirParams, tuning: &Tuning) -> Result<(Setup, f64)> {
    params.validate()?;
    tuning.validate()?;
    if tuning.n_increments() == 0 {
        return Err(estimator::EstimatorError::DegenerateHorizon { h: tuning.h, big_delta: tuning.big_delta_n() }.into());
    }
    let m = e_nu_tau(params, tuning.tau);
    let s = Setup {
        al: params.alpha.into(),
        th: params.theta.into(),
        ga: params.gamma.into(),
        m: m.into(),
        d: tuning.delta_n.into(),
        k: Dd::from_u64(tuning.k_n() as u64),
        big_d: Dd::from_u64(tuning.lambda_n() as u64) * tuning.delta_n,
        h: Dd::from_u64(tuning.n_increments() as u64) * Dd::from_u64(tuning.lambda_n() as u64) * tuning.delta_n,
    };
    Ok((s, m))
}

/// Exact bias of the PSRV from the compact closed forms, with an optional noise term.
///
/// The horizon entering the formulas is the span `⌊h/Δ⌋·Δ` actually covered by the
/// increments. `W = Δ` is treated as non-overlapping.
pub fn bias_closed_form(params: &CirParams, tuning: &Tuning, noise: Option<NoiseMoments>) -> Result<BiasBreakdown> {
    let (s, m) = setup(params, tuning)?;
    let overlap = tuning.overlaps();
    let g2 = s.ga.sqr();
    let factor_a = s.a_factor();
    let factor_b = s.b_factor();
    let a_term = g2 * s.al * s.h * (factor_a - 1.0);
    let b_term = g2 * (s.m - s.al) * (-(-(s.th * s.h)).exp_m1()) / s.th * (factor_b - 1.0);
    let c_term = s.c_term();
    let o_term = if overlap { s.o_term() } else { Dd::ZERO };

    let (mut d_stationary, mut d_transient) = (Dd::ZERO, Dd::ZERO);
    if let Some(nm) = noise {
        nm.validate()?;
        let v = Dd::from(nm.v_eta);
        let q = Dd::from(nm.q_eta);
        if overlap {
            let w = tuning.w_n();
            let bd = tuning.big_delta_n();
            if (w - bd).abs() <= 1e-9 * bd {
                return Err(BiasError::Boundary { w, big_delta: bd });
            }
            d_stationary = s.noise_overlap(v, q, true);
            d_transient = s.noise_overlap(v, q, false);
        } else {
            d_stationary = s.noise_no_overlap(v, q, true);
            d_transient = s.noise_no_overlap(v, q, false);
        }
    }
    let d_term = d_stationary + d_transient;
    let (a, b, c, o, d) = (a_term.to_f64(), b_term.to_f64(), c_term.to_f64(), o_term.to_f64(), d_term.to_f64());
    Ok(BiasBreakdown {
        a_term: a,
        b_term: b,
        c_term: c,
        o_term: o,
        d_term: d,
        total: a + b + c + o + d,
        factor_a: factor_a.to_f64(),
        factor_b: factor_b.to_f64(),
        d_stationary: d_stationary.to_f64(),
        d_transient: d_transient.to_f64(),
        mean_at_start: m,
        overlap,
    })
}

fn layout(tuning: &Tuning) -> Layout {
    Layout {
        d: tuning.delta_n.into(),
        k: tuning.k_n() as u64,
        lambda_n: tuning.lambda_n() as u64,
        n: tuning.n_increments() as u64,
    }
}

/// `E[PSRV]` (noise-free) assembled from window moments, under the same convention as the
/// closed forms: the variance at `τ` is replaced by its mean `E[ν(τ)]`.
pub fn bias_moment_assembly(params: &CirParams, tuning: &Tuning) -> Result<f64> {
    let (s, _) = setup(params, tuning)?;
    let kernel = Kernel::new(s.al, s.th, s.ga, s.m, Dd::ZERO);
    Ok(moments::expected_psrv(&kernel, &layout(tuning)).to_f64())
}

/// `E[PSRV]` (noise-free) for a variance started at `ν0` at time zero, the law that a
/// simulation from time zero samples. Requires `τ ≥ W`.
pub fn expected_psrv_from_origin(params: &CirParams, tuning: &Tuning) -> Result<f64> {
    let (s, _) = setup(params, tuning)?;
    if tuning.tau < tuning.w_n() * (1.0 - 1e-12) {
        return Err(BiasError::Argument(format!(
            "first window starts before time zero (tau = {}, window = {})",
            tuning.tau,
            tuning.w_n()
        )));
    }
    let kernel = Kernel::new(s.al, s.th, s.ga, params.nu0.into(), tuning.tau.into());
    Ok(moments::expected_psrv(&kernel, &layout(tuning)).to_f64())
}

/// Cross moments `E[RV_later·RV_earlier]` summed over increments and split by segment pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapComponents {
    /// Later-only × earlier-only segments.
    pub disjoint: f64,
    /// Later-only × shared.
    pub later_shared: f64,
    /// Shared × earlier-only.
    pub shared_earlier: f64,
    /// Shared × shared.
    pub shared: f64,
}

/// Cross moments of consecutive windows split over their shared segment, each divided by
/// `W²` and summed over increments. Valid for `W ≥ Δ`; at `W = Δ` the shared segment is
/// empty and the last three components vanish.
pub fn overlap_components(params: &CirParams, tuning: &Tuning) -> Result<OverlapComponents> {
    let (s, _) = setup(params, tuning)?;
    if tuning.k_n() < tuning.lambda_n() {
        return Err(BiasError::Argument("windows do not reach the previous grid point".into()));
    }
    let kernel = Kernel::new(s.al, s.th, s.ga, s.m, Dd::ZERO);
    let lay = layout(tuning);
    let w2 = (s.d * Dd::from_u64(lay.k)).sqr();
    let mut acc = [Dd::ZERO; 4];
    for i in 1..=lay.n {
        let mo = moments::increment(&kernel, &lay, i);
        for (a, c) in acc.iter_mut().zip(mo.cross) {
            *a = *a + c;
        }
    }
    let f = |x: Dd| (x / w2).to_f64();
    Ok(OverlapComponents { disjoint: f(acc[0]), later_shared: f(acc[1]), shared_earlier: f(acc[2]), shared: f(acc[3]) })
}

/// Output of [`noise_divergence_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDivergence {
    /// `k·δ²·Δ·D_N`.
    pub scaled: f64,
    /// `4(Q_η + V_η²)h`.
    pub limit: f64,
}

/// Rescaled non-overlapping noise term and its small-mesh limit.
pub fn noise_divergence_check(params: &CirParams, tuning: &Tuning, noise: NoiseMoments) -> Result<NoiseDivergence> {
    if tuning.overlaps() {
        return Err(BiasError::Argument("the noise divergence law concerns non-overlapping windows".into()));
    }
    let (s, _) = setup(params, tuning)?;
    noise.validate()?;
    let (v, q) = (Dd::from(noise.v_eta), Dd::from(noise.q_eta));
    let d_term = s.noise_no_overlap(v, q, true) + s.noise_no_overlap(v, q, false);
    Ok(NoiseDivergence {
        scaled: (s.k * s.d.sqr() * s.big_d * d_term).to_f64(),
        limit: (4.0 * (q + v.sqr()) * s.h).to_f64(),
    })
}

/// Bias of the locally averaged realized variance at `τ`:
/// `(ν0 − α)e^{−θτ}(e^{θW} − 1 − θW)/(θW)`, plus `2V_η/δ` with noise.
pub fn larv_bias(params: &CirParams, tau: f64, k_n: usize, delta_n: f64, noise: Option<NoiseMoments>) -> Result<f64> {
    params.validate()?;
    if k_n == 0 || !(delta_n > 0.0) {
        return Err(BiasError::Argument("window must contain at least one positive step".into()));
    }
    let x = params.theta * k_n as f64 * delta_n;
    let drift = (params.nu0 - params.alpha) * (-params.theta * tau).exp() * stable::exp_m1_minus_x_over_x(x);
    let noise_part = noise.map_or(0.0, |n| 2.0 * n.v_eta / delta_n);
    Ok(drift + noise_part)
}
