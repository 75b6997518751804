//! Exact expected value of the realized variance of spot-variance estimates, compact form.
//!
//! The window of `k` returns of mesh `δ` spans `W = kδ`; consecutive estimates are `Δ` apart
//! and `n = ⌊h/Δ⌋` squared increments cover `h = nΔ`. Moments of the variance are taken from
//! the estimation start, whose expected variance is `m`:
//!
//! `E[PSRV] − E[QV] = γ²αh(A − 1) + γ²(m − α)(1 − e^{−θh})/θ·(B − 1) + C (+ O when W > Δ)`.
//!
//! Every factor is evaluated in double-double arithmetic because the terms cancel to many
//! digits.

use crate::dd::Dd;

/// Inputs of the compact formulas, all in double-double.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Setup {
    pub al: Dd,
    pub th: Dd,
    pub ga: Dd,
    /// Expected variance at the estimation start.
    pub m: Dd,
    /// Price mesh.
    pub d: Dd,
    /// Window length in returns.
    pub k: Dd,
    /// Spacing of the estimates.
    pub big_d: Dd,
    /// Horizon covered by the increments.
    pub h: Dd,
}

fn e(x: Dd) -> Dd {
    x.exp()
}

impl Setup {
    fn w(&self) -> Dd {
        self.k * self.d
    }

    /// `A_N`: coefficient of the stationary part `γ²αh`.
    pub fn a_factor(&self) -> Dd {
        let Setup { th, d, k, big_d, .. } = *self;
        let w = self.w();
        let x = th * d;
        let em = e(-x);
        let em2 = e(-(x * 2.0));
        let one_m = -(-x).exp_m1();
        let br = 3.0 / (2.0 * th.sqr()) * one_m.sqr()
            + 3.0 / th * (th.recip() - 2.0 * em * d - em2 / th)
            + 3.0 / th * d * (1.0 + 2.0 * em)
            + 3.0 / (2.0 * th.sqr()) * (em2 + 4.0 * em - 5.0);
        let inner = 2.0 / th * k * br
            + 2.0 / th.powi(3) * (e(-(th * w)) - 1.0 + k - k * em)
            + th.powi(3).recip() * e(-(th * big_d)) * (2.0 - e(th * w) - e(-(th * w)));
        inner / (w.sqr() * big_d)
    }

    /// `B_N`: coefficient of the transient part `γ²(m − α)(1 − e^{−θh})/θ`.
    pub fn b_factor(&self) -> Dd {
        let Setup { th, d, k, big_d, .. } = *self;
        let w = self.w();
        let x = th * d;
        let em = e(-x);
        let one_m = -(-x).exp_m1();
        let ew_m1 = (th * w).exp_m1();
        let inner = 3.0 / th.sqr() * ew_m1 * one_m
            + 3.0 / th * ew_m1 / one_m * (th.recip() - 2.0 * em * d - e(-(x * 2.0)) / th)
            + 2.0 / th * d / x.exp_m1() * (k - 1.0 + e(th * w) - k * e(x));
        let outer = (1.0 + e(th * big_d)) * inner + 2.0 / th * w * (-ew_m1);
        e(-(th * big_d)) / (-(-(th * big_d)).exp_m1()) * outer / w.sqr()
    }

    /// `C_N`: terms quadratic in the transient plus the discretization terms.
    pub fn c_term(&self) -> Dd {
        let Setup { al, th, ga, m, d, k, big_d, h } = *self;
        let w = self.w();
        let x = th * d;
        let u = m - al;
        let br = u.sqr() + ga.sqr() / th * (al / 2.0 - m);
        let one_m = -(-x).exp_m1();
        let t1 = e(-(2.0 * th * big_d)) * (-(-(2.0 * th * h)).exp_m1()) / (-(-(2.0 * th * big_d)).exp_m1())
            / th.sqr()
            * br
            * ((1.0 + e(2.0 * th * big_d)) / (-(-(2.0 * x)).exp_m1())
                * (3.0 * (2.0 * th * w).exp_m1() * one_m.sqr()
                    + 2.0 * one_m
                    + 2.0 * e(th * w) * (-(2.0 * x)).exp_m1()
                    + 2.0 * e(2.0 * th * w - x) * one_m)
                - 2.0 * e(th * big_d) * (th * w).exp_m1().sqr());
        let t2 = (6.0 * al.sqr() * d.sqr() * k - 2.0 * al.sqr() * k * d.sqr()) * h / big_d;
        let ew_m1 = (th * w).exp_m1();
        let t3 = e(-(th * big_d)) * (-(-(th * h)).exp_m1()) / (-(-(th * big_d)).exp_m1())
            * ((6.0 * al / th * d * u * ew_m1
                + 2.0 * al / th * d * u / x.exp_m1()
                    * ((ew_m1 + k - k * e(x)) + k * e(th * w) * x.exp_m1() + e(x) * (-ew_m1)))
                * (1.0 + e(th * big_d))
                + 2.0 * al / th * w * u * (1.0 + e(th * big_d)) * (-ew_m1));
        (t1 + t2 + t3) / w.sqr()
    }

    /// `O_N`: extra contribution of overlapping windows (`W > Δ`).
    ///
    /// The stationary and quadratic-transient parts follow the published expression except
    /// that the `4α²δh` term is reduced by `4α²kδ²h/Δ`, which the discretization term of
    /// `C_N` already counts. The parts linear in `m − α` are replaced by a re-derivation; the
    /// published ones do not match the moment assembly.
    pub fn o_term(&self) -> Dd {
        let Setup { al, th, ga, m, d, k, big_d, h } = *self;
        let w = self.w();
        let g2 = ga.sqr();
        let u = m - al;
        let mut t = 4.0 * al.sqr() * h * d - 4.0 * al.sqr() * k * d.sqr() * h / big_d;

        // Stationary vol-of-vol part.
        t = t + g2 * al * h / th.powi(3) * e(-(th * (d + w + big_d))) / big_d
            * (e(th * d) - 2.0 * e(th * d * (1.0 + k)) + e(th * d * (1.0 + 2.0 * k))
                - 2.0 * e(th * (d + big_d))
                - 4.0 * e(th * (w + big_d)) * k
                + e(th * (d + w + big_d)) * (2.0 + k * (4.0 - 6.0 * th * d)));
        t = t + 2.0 * g2 * al * h / th.powi(3) * e(-(th * d * (1.0 + k))) / big_d
            * (e(th * d) + 2.0 * e(th * w) * k - e(th * d * (1.0 + k)) * (1.0 - k * (3.0 * th * d - 2.0)));
        t = t - g2 * al * h / th.powi(3) * e(-(th * (1.0 + 2.0 * k) * d)) / (d * big_d)
            * (-4.0 * e(2.0 * th * w) * (-(th * d).exp_m1()) * big_d
                + 6.0 * th * e(th * d * (1.0 + 2.0 * k)) * k * d.sqr()
                + d * (e(th * (d + w - big_d)) - 2.0 * e(th * (d + 2.0 * w - big_d))
                    + e(th * (d + w + big_d))
                    + 4.0 * e(2.0 * th * w) * k
                    - 2.0 * e(th * d * (1.0 + 2.0 * k)) * (2.0 * k + 3.0 * th * big_d)));

        // Quadratic transient part.
        let br = g2 * (al - 2.0 * m) / (2.0 * th) + (al - m).sqr();
        t = t - (e(-(2.0 * th * big_d)) * (-(-(2.0 * th * h)).exp_m1()) * (th * w).exp_m1()
            * (-2.0 * e(th * big_d) * (th * w).exp_m1()
                + (-3.0 + e(th * d) - e(th * w) + 3.0 * e(th * (d + w))) * (1.0 + e(2.0 * th * big_d))
                    / (1.0 + e(th * d)))
            * br)
            / (th.sqr() * (-(-(2.0 * th * big_d)).exp_m1()));

        // Linear transient part (re-derived).
        let g = (-(-(th * h)).exp_m1()) / (th * big_d).exp_m1();
        let lin_a = 8.0 * al * d * (e(th * big_d) - e(th * w)) / th;
        let x = th;
        let lin_g = 2.0 * g2
            * (big_d * x * e(big_d * x) - big_d * x * e(x * (big_d + d)) + big_d * x * e(d * k * x)
                - big_d * x * e(d * x * (k + 1.0))
                - d * k * x * e(big_d * x)
                + d * k * x * e(x * (big_d + d))
                - d * k * x * e(d * k * x)
                + d * k * x * e(d * x * (k + 1.0))
                - 4.0 * d * x * e(big_d * x)
                + 4.0 * d * x * e(d * k * x)
                - 6.0 * e(big_d * x)
                + 6.0 * e(x * (big_d + d))
                + 6.0 * e(d * k * x)
                - 6.0 * e(d * x * (k + 1.0)))
            / (x.powi(3) * (d * x).exp_m1());
        t = t + u * g * (lin_a + lin_g);

        // Terms in 2α²θ + α(γ² − 4θm) + 2m(θm − γ²).
        let q = 2.0 * al.sqr() * th + al * (g2 - 4.0 * th * m) + 2.0 * m * (th * m - g2);
        let one_m_2h = -(-(2.0 * th * h)).exp_m1();
        let e2d_m1 = (2.0 * th * big_d).exp_m1();
        t = t - q / (2.0 * th.powi(3) * (1.0 + e(th * d)) * e2d_m1)
            * (one_m_2h * (th * w).exp_m1() * (3.0 - e(th * d) + e(th * w) - 3.0 * e(th * (d + w)))
                * (1.0 + e(2.0 * th * big_d)));
        t = t - q / th.powi(3) * one_m_2h / ((1.0 + e(th * d)) * e2d_m1)
            * (-2.0 * e(2.0 * th * w) + 2.0 * e(th * (d + 2.0 * w)) + e(th * big_d) + 2.0 * e(2.0 * th * big_d)
                + e(th * (d + big_d))
                - 2.0 * e(th * (w + big_d))
                - 2.0 * e(th * (d + w + big_d))
                + e(th * (2.0 * w + big_d))
                + e(th * (d + 2.0 * w + big_d))
                - 2.0 * e(th * (d + 2.0 * big_d)));
        t / w.sqr()
    }

    /// Noise term without overlap, `D_N`: the part proportional to `h` when `stationary`,
    /// otherwise the part proportional to `α − m`.
    pub fn noise_no_overlap(&self, v: Dd, q: Dd, stationary: bool) -> Dd {
        let Setup { al, th, m, d, k, big_d, h, .. } = *self;
        let w = self.w();
        if stationary {
            (4.0 * (q + v.sqr()) + 16.0 * al * v * d) * h / (k * d.sqr() * big_d)
        } else {
            8.0 / th * v * (al - m) * (-(-(th * h)).exp_m1()) * (1.0 + e(-(th * big_d)))
                * (-(-(th * w)).exp_m1())
                / ((-(-(th * big_d)).exp_m1()) * k.sqr() * d.sqr())
        }
    }

    /// Noise term with overlap, `D*_N`, split as in [`Setup::noise_no_overlap`].
    pub fn noise_overlap(&self, v: Dd, q: Dd, stationary: bool) -> Dd {
        let Setup { al, th, m, d, k, big_d, h, .. } = *self;
        let w = self.w();
        if stationary {
            return (4.0 * (q + v.sqr()) + 16.0 * al * v * d) * h / (k.sqr() * d.powi(3));
        }
        let brace = (2.0 + k) / (2.0 * k * d)
            * ((th * w - th * big_d).exp_m1() * (w + big_d) / (w - big_d) + (e(-(th * big_d)) - e(th * w)))
            + k / (2.0 * big_d) * (1.0 + e(th * w)) * (-(-(th * big_d)).exp_m1());
        8.0 / th * v * (al - m) * (-(-(th * h)).exp_m1()) / ((-(-(th * big_d)).exp_m1()) * k.sqr() * d.sqr())
            * brace
    }
}
