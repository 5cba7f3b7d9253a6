//! Scalar functions appearing in the sandwich and ratio bounds, evaluated
//! without cancellation near zero.

const SERIES_CUTOFF: f64 = 0.1;
const SERIES_TERMS: usize = 18;

/// `(e^{-x} + x - 1) / x^2`, continuous at 0 with value 1/2.
pub fn lower_kernel(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        // sum_{n>=2} (-x)^n / n!  divided by x^2
        let mut term = 0.5;
        let mut acc = 0.0;
        for n in 2..SERIES_TERMS {
            acc += term;
            term *= -x / (n + 1) as f64;
        }
        acc
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

/// `(e^{x} - x - 1) / x^2`, continuous at 0 with value 1/2.
pub fn upper_kernel(x: f64) -> f64 {
    lower_kernel(-x)
}

/// `chi(x) = e^x (x - 1) + 1`, which is at least `x^2 / 2` for `x >= 0`.
pub fn chi(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        // sum_{n>=2} (n-1) x^n / n!
        let mut pow_over_fact = x * x / 2.0;
        let mut acc = 0.0;
        for n in 2..SERIES_TERMS {
            acc += (n - 1) as f64 * pow_over_fact;
            pow_over_fact *= x / (n + 1) as f64;
        }
        acc
    } else {
        x * x.exp() - x.exp_m1()
    }
}

/// `log chi(x)` for `x > 0`, finite even where `chi` overflows.
pub fn log_chi(x: f64) -> f64 {
    if x > 30.0 {
        x + (x - 1.0 + (-x).exp()).ln()
    } else {
        chi(x).ln()
    }
}
