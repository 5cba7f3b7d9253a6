//! Central finite-difference estimates of the first three derivatives of a
//! scalar function. Used as an oracle for the moment formulas; it only ever
//! evaluates the function itself.

/// Step sizes tried by [`estimates`].
pub const STEPS: [f64; 3] = [1e-4, 1e-3, 1e-2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeEstimate {
    pub step: f64,
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

fn third_difference(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    // 7-point, fourth order
    (-f(x + 3.0 * h) + 8.0 * f(x + 2.0 * h) - 13.0 * f(x + h) + 13.0 * f(x - h) - 8.0 * f(x - 2.0 * h)
        + f(x - 3.0 * h))
        / (8.0 * h * h * h)
}

/// Fourth-order central differences at step `h`. The third derivative is
/// further Richardson-extrapolated from steps `h` and `h/2`.
pub fn estimate(f: impl Fn(f64) -> f64, x: f64, h: f64) -> DerivativeEstimate {
    let f0 = f(x);
    let (p1, m1, p2, m2) = (f(x + h), f(x - h), f(x + 2.0 * h), f(x - 2.0 * h));
    let first = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let second = (-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
    let coarse = third_difference(&f, x, h);
    let fine = third_difference(&f, x, h / 2.0);
    let third = (16.0 * fine - coarse) / 15.0;
    DerivativeEstimate { step: h, first, second, third }
}

/// One estimate per entry of [`STEPS`].
pub fn estimates(f: impl Fn(f64) -> f64 + Copy, x: f64) -> Vec<DerivativeEstimate> {
    STEPS.iter().map(|&h| estimate(f, x, h)).collect()
}
