//! Leading terms of the bias and the tuning rules derived from them.

use estimator::Tuning;
use sde::CirParams;
use serde::{Deserialize, Serialize};

use crate::stable::one_minus_exp_neg;
use crate::{e_nu_tau, BiasError, Result};

/// Admissible pair of rate exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateBranch {
    /// `b ≥ −1/2` and `c < −b`: the window term survives.
    Wide,
    /// `b < −1/2` and `c < 1 + b`.
    Narrow,
}

impl RateBranch {
    pub fn select(b: f64, c: f64) -> Result<Self> {
        if b >= -0.5 && c < -b {
            Ok(RateBranch::Wide)
        } else if b < -0.5 && c < 1.0 + b {
            Ok(RateBranch::Narrow)
        } else {
            Err(BiasError::RateConstraint { b, c })
        }
    }
}

/// Small-horizon leading bias with overlapping windows, for a variance level `level` whose
/// squared diffusion coefficient is `diffusion_sq`:
/// `(4·level²/(κ²δ^{1+2b}) − diffusion_sq)·h` on the wide branch and `−diffusion_sq·h` on the
/// narrow one.
pub fn leading_term_general(level: f64, diffusion_sq: f64, tuning: &Tuning) -> Result<f64> {
    let h = tuning.h;
    match RateBranch::select(tuning.b, tuning.c)? {
        RateBranch::Wide => {
            let window = tuning.kappa * tuning.kappa * tuning.delta_n.powf(1.0 + 2.0 * tuning.b);
            Ok((4.0 * level * level / window - diffusion_sq) * h)
        }
        RateBranch::Narrow => Ok(-diffusion_sq * h),
    }
}

/// Leading bias with overlapping windows under CIR dynamics. With `conditional = Some(ν(τ))`
/// the spot variance replaces `E[ν(τ)]`.
pub fn leading_term_overlap(params: &CirParams, tuning: &Tuning, conditional: Option<f64>) -> Result<f64> {
    params.validate()?;
    let m = conditional.unwrap_or_else(|| e_nu_tau(params, tuning.tau));
    leading_term_general(m, params.gamma * params.gamma * m, tuning)
}

/// Window scale cancelling the conditional leading bias at `b = −1/2`: `2√ν/γ`.
pub fn kappa_star(nu_tau: f64, gamma: f64) -> Result<f64> {
    kappa_star_general(nu_tau, gamma, 0.5)
}

/// Window scale cancelling the leading bias when the diffusion is `γν^β`: `2ν^{1−β}/γ`.
pub fn kappa_star_general(nu_tau: f64, gamma: f64, beta: f64) -> Result<f64> {
    if !(nu_tau > 0.0 && gamma > 0.0) {
        return Err(BiasError::Argument(format!("spot variance and gamma must be positive, got {nu_tau} and {gamma}")));
    }
    if !(beta >= 0.5) {
        return Err(BiasError::Argument(format!("beta must be at least 1/2, got {beta}")));
    }
    if beta == 0.5 {
        return Ok(2.0 * nu_tau.sqrt() / gamma);
    }
    Ok(2.0 * nu_tau.powf(1.0 - beta) / gamma)
}

/// Coefficients of `Δ`, `1/(kΔ)` and `kδ/Δ` in the small-mesh expansion without overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

pub fn expansion_coeffs(params: &CirParams, tau: f64, h: f64) -> Result<ExpansionCoeffs> {
    params.validate()?;
    let CirParams { alpha: al, theta: th, gamma: ga, .. } = *params;
    let g2 = ga * ga;
    let m = e_nu_tau(params, tau);
    let u = m - al;
    let decay1 = one_minus_exp_neg(th * h);
    let decay2 = one_minus_exp_neg(2.0 * th * h);
    let quad = u * u + g2 / th * (al / 2.0 - m);
    let transient = g2 * u * decay1 / th;
    let a1 = -th / 2.0 * g2 * al * h + th / 2.0 * transient + th / 2.0 * decay2 * quad;
    let a2 = 2.0 / th * g2 * al * h
        + 4.0 / th * transient
        + 2.0 / th * decay2 * quad
        + 4.0 * al * al * h
        + 8.0 * al * u * decay1 / th;
    let a3 = -transient;
    Ok(ExpansionCoeffs { a1, a2, a3 })
}

/// `a₁Δ + a₂/(kΔ) + a₃·kδ/Δ` for a tuning on an admissible rate branch.
pub fn leading_bias_no_overlap(params: &CirParams, tuning: &Tuning) -> Result<f64> {
    RateBranch::select(tuning.b, tuning.c)?;
    let co = expansion_coeffs(params, tuning.tau, tuning.h)?;
    let bd = tuning.big_delta_n();
    let k = tuning.k_n() as f64;
    Ok(co.a1 * bd + co.a2 / (k * bd) + co.a3 * k * tuning.delta_n / bd)
}

/// Solution of the bias-cancelling equation at `b = −1/2`, `c = 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoOverlapThreshold {
    /// Positive root of `a₃κ² + a₁λ²κ + a₂ = 0`.
    pub kappa_tilde: Option<f64>,
    /// `(λ/κ̃)⁴` (years): finer meshes keep windows from overlapping.
    pub delta_star: Option<f64>,
}

/// Solves `a₃κ² + a₁λ²κ + a₂ = 0` for `κ > 0`. With two positive roots the smaller one is
/// returned, which gives the larger threshold mesh.
pub fn no_overlap_threshold(params: &CirParams, tau: f64, h: f64, lambda: f64) -> Result<NoOverlapThreshold> {
    if !(lambda > 0.0) {
        return Err(BiasError::Argument(format!("lambda must be positive, got {lambda}")));
    }
    let co = expansion_coeffs(params, tau, h)?;
    let (qa, qb, qc) = (co.a3, co.a1 * lambda * lambda, co.a2);
    let scale = qa.abs().max(qb.abs()).max(qc.abs());
    let roots: Vec<f64> = if qa.abs() <= 1e-14 * scale {
        if qb == 0.0 {
            vec![]
        } else {
            vec![-qc / qb]
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            vec![]
        } else {
            // Cancellation-free pair of roots.
            let t = -0.5 * (qb + qb.signum() * disc.sqrt());
            let mut r = vec![t / qa];
            if t != 0.0 {
                r.push(qc / t);
            }
            r
        }
    };
    let kappa_tilde = roots.into_iter().filter(|r| *r > 0.0 && r.is_finite()).reduce(f64::min);
    Ok(NoOverlapThreshold { kappa_tilde, delta_star: kappa_tilde.map(|k| (lambda / k).powi(4)) })
}

/// Largest `λ` with `λ·δ*(λ)^{1/4} ≤ h`, by bisection to 1e−10 relative. `None` when no
/// positive threshold exists for small `λ`.
pub fn lambda_star(params: &CirParams, tau: f64, h: f64) -> Result<Option<f64>> {
    // Span of the last increment at the threshold, minus the horizon.
    let excess = |lambda: f64| -> Result<Option<f64>> {
        Ok(no_overlap_threshold(params, tau, h, lambda)?.delta_star.map(|d| lambda * d.sqrt().sqrt() - h))
    };
    let mut lo = 1e-12;
    if !matches!(excess(lo)?, Some(e) if e <= 0.0) {
        return Ok(None);
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        match excess(hi)? {
            Some(e) if e <= 0.0 => lo = hi,
            _ => break,
        }
        if hi > 1e12 {
            return Ok(Some(hi));
        }
    }
    while (hi - lo) > 1e-10 * lo {
        let mid = 0.5 * (lo + hi);
        match excess(mid)? {
            Some(e) if e <= 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(Some(lo))
}

/// Mesh below which windows tuned with `κ* = 2√ν/γ` stop overlapping the grid step
/// `λδ^c`: `(κ*/λ)^{1/(c − 1/2)}` (years).
pub fn overlap_threshold_delta(nu_tau: f64, gamma: f64, lambda: f64, c: f64) -> Result<f64> {
    if !(c < 0.5) {
        return Err(BiasError::Argument(format!("grid exponent must be below 1/2, got {c}")));
    }
    if !(lambda > 0.0) {
        return Err(BiasError::Argument(format!("lambda must be positive, got {lambda}")));
    }
    let k = kappa_star(nu_tau, gamma)?;
    Ok((k / lambda).powf(1.0 / (c - 0.5)))
}
