//! Cancellation-free forms of the small-argument exponential combinations.

/// `1 − e^{−x}`.
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `e^x − 1 − x`.
pub fn exp_m1_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Taylor series; 25 terms reach full precision for |x| < 1/2.
        let mut term = x * x / 2.0;
        let mut s = term;
        let mut n = 3.0;
        while term.abs() > 1e-17 * s.abs() && n < 40.0 {
            term *= x / n;
            s += term;
            n += 1.0;
        }
        s
    } else {
        x.exp_m1() - x
    }
}

/// `(e^x − 1 − x)/x`, equal to `x/2 + O(x²)` near zero.
pub fn exp_m1_minus_x_over_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        exp_m1_minus_x(x) / x
    }
}
