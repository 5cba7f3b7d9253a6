//! Divided differences of `exp`, evaluated without cancellation for close or
//! coincident nodes.

const SERIES_SPREAD: f64 = 0.1;
const SERIES_TERMS: usize = 20;

/// `(e^x - 1) / x`, equal to 1 at 0.
fn exprel(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// `exp[a, b]`.
pub fn exp_dd2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi.exp() * exprel(lo - hi)
}

/// `exp[a, b, c]`, symmetric in its arguments.
pub fn exp_dd3(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(|x, y| y.total_cmp(x));
    let [hi, mid, lo] = v;
    let spread = hi - lo;
    if spread < SERIES_SPREAD {
        // exp[x+c, y+c, c] = e^c sum_n h_n(x, y, 0) / (n + 2)!
        let (x, y) = (hi - lo, mid - lo);
        let mut acc = 0.0;
        let mut h = 1.0; // h_n(x, y)
        let mut y_pow = 1.0;
        let mut fact = 2.0;
        for n in 0..SERIES_TERMS {
            acc += h / fact;
            y_pow *= y;
            h = x * h + y_pow;
            fact *= (n + 3) as f64;
        }
        lo.exp() * acc
    } else {
        (exp_dd2(hi, mid) - exp_dd2(mid, lo)) / spread
    }
}
