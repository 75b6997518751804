//! Expected PSRV assembled from second moments of realized variances over windows.
//!
//! With price shocks independent of the variance, a realized variance `RV` over a union of
//! return cells satisfies `E[RV·RV'] = E[IV·IV']` for disjoint spans and
//! `E[RV²] = E[IV²] + 2·Σ_cells E[IV_cell²]`. Every integral of the variance kernel reduces to
//! exponential integrals, and sums over equally spaced cells to geometric series, so the
//! assembly is exact and evaluated in double-double arithmetic.

use crate::dd::Dd;

/// Second-moment kernel `E[ν(s)ν(r)] = Σ c·e^{ps}·e^{qr}` for `s ≤ r`, times measured from
/// the estimation start.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    terms: Vec<(Dd, Dd, Dd)>,
}

impl Kernel {
    /// Kernel of a CIR variance that equals `m` with certainty at time `−offset`.
    ///
    /// `offset = 0` is the convention of the compact formulas: the variance at the estimation
    /// start is replaced by its mean and the moment law is extended backward over the window.
    pub fn new(al: Dd, th: Dd, ga: Dd, m: Dd, offset: Dd) -> Self {
        let g2 = ga.sqr();
        let u = m - al;
        let d0 = al * g2 / (2.0 * th);
        let d1 = u * (al + g2 / th);
        let d2 = u.sqr() + g2 / th * (al / 2.0 - m);
        let shift1 = (-(th * offset)).exp();
        let shift2 = (-(2.0 * th * offset)).exp();
        let z = Dd::ZERO;
        Self {
            terms: vec![
                (al.sqr(), z, z),
                (al * u * shift1, -th, z),
                (d0, th, -th),
                (d1 * shift1, z, -th),
                (d2 * shift2, -th, -th),
            ],
        }
    }

    /// `E[(∫_a^b ν)²]`.
    pub fn iv_sq(&self, a: Dd, b: Dd) -> Dd {
        self.terms.iter().map(|&(c, p, q)| 2.0 * c * ordered(a, b, p, q)).sum()
    }

    /// `E[∫_A ν · ∫_B ν]` for spans with `A` entirely before `B`.
    pub fn iv_cross(&self, a: (Dd, Dd), b: (Dd, Dd)) -> Dd {
        self.terms.iter().map(|&(c, p, q)| c * span(a.0, a.1, p) * span(b.0, b.1, q)).sum()
    }

    /// `Σ_j E[IV_j²]` over `cells` consecutive cells of width `d` starting at `a`.
    pub fn cells_iv_sq(&self, a: Dd, d: Dd, cells: u64) -> Dd {
        if cells == 0 {
            return Dd::ZERO;
        }
        self.terms
            .iter()
            .map(|&(c, p, q)| {
                let s = p + q;
                let geo = if s.hi == 0.0 {
                    Dd::from_u64(cells)
                } else {
                    (s * a).exp() * (s * d * Dd::from_u64(cells)).exp_m1() / (s * d).exp_m1()
                };
                2.0 * c * ordered(Dd::ZERO, d, p, q) * geo
            })
            .sum()
    }

    /// `E[RV²]` over `cells` cells of width `d` starting at `a`.
    pub fn rv_sq(&self, a: Dd, d: Dd, cells: u64) -> Dd {
        let b = a + d * Dd::from_u64(cells);
        self.iv_sq(a, b) + 2.0 * self.cells_iv_sq(a, d, cells)
    }
}

/// `∫_a^b e^{ps} ds`.
fn span(a: Dd, b: Dd, p: Dd) -> Dd {
    if p.hi == 0.0 {
        b - a
    } else {
        (p * a).exp() * (p * (b - a)).exp_m1() / p
    }
}

/// `∫_a^b e^{qr} ∫_a^r e^{ps} ds dr`.
fn ordered(a: Dd, b: Dd, p: Dd, q: Dd) -> Dd {
    let l = b - a;
    let base = match (p.hi == 0.0, q.hi == 0.0) {
        (true, true) => l.sqr() / 2.0,
        (false, true) => ((p * l).exp_m1() / p - l) / p,
        (true, false) => (l * (q * l).exp() - (q * l).exp_m1() / q) / q,
        (false, false) => (span(Dd::ZERO, l, p + q) - span(Dd::ZERO, l, q)) / p,
    };
    (a * (p + q)).exp() * base
}

/// Layout of the estimates entering one squared increment.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub d: Dd,
    pub k: u64,
    pub lambda_n: u64,
    pub n: u64,
}

/// Second moments of one increment `ν̂(x) − ν̂(x − Δ)`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct IncrementMoments {
    /// `E[RV²]` of the later window.
    pub later: Dd,
    /// `E[RV²]` of the earlier window.
    pub earlier: Dd,
    /// Cross moment split over the segments of the two windows: later-only × earlier-only,
    /// later-only × shared, shared × earlier-only, shared × shared.
    pub cross: [Dd; 4],
}

impl IncrementMoments {
    pub fn cross_total(&self) -> Dd {
        self.cross.iter().copied().sum()
    }
}

/// Moments of the `i`-th increment, `x = iΔ`. The shared segment is
/// `[x − W, x − Δ]`; at `W = Δ` it is empty and its terms are exactly zero. Windows with
/// `W < Δ` share nothing and have a single cross term.
pub(crate) fn increment(kernel: &Kernel, lay: &Layout, i: u64) -> IncrementMoments {
    let d = lay.d;
    let x = d * Dd::from_u64(i * lay.lambda_n);
    let w = d * Dd::from_u64(lay.k);
    let big_d = d * Dd::from_u64(lay.lambda_n);
    let later = kernel.rv_sq(x - w, d, lay.k);
    let earlier = kernel.rv_sq(x - big_d - w, d, lay.k);
    let cross = if lay.k >= lay.lambda_n {
        let shared_cells = lay.k - lay.lambda_n;
        let r = (x - big_d, x);
        let s = (x - w, x - big_d);
        let p = (x - big_d - w, x - w);
        [
            kernel.iv_cross(p, r),
            kernel.iv_cross(s, r),
            kernel.iv_cross(p, s),
            kernel.rv_sq(s.0, d, shared_cells),
        ]
    } else {
        let z = Dd::ZERO;
        [kernel.iv_cross((x - big_d - w, x - big_d), (x - w, x)), z, z, z]
    };
    IncrementMoments { later, earlier, cross }
}

/// `E[PSRV]` as `Σ_i (E[RV_later²] + E[RV_earlier²] − 2·E[RV_later·RV_earlier]) / W²`.
pub(crate) fn expected_psrv(kernel: &Kernel, lay: &Layout) -> Dd {
    let w2 = (lay.d * Dd::from_u64(lay.k)).sqr();
    (1..=lay.n)
        .map(|i| {
            let mo = increment(kernel, lay, i);
            mo.later + mo.earlier - 2.0 * mo.cross_total()
        })
        .sum::<Dd>()
        / w2
}
