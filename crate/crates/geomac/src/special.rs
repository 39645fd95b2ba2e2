//! Small numeric helpers shared across modules.

use std::f64::consts::PI;

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `sin(pi * num / den)` with exact zeros when `num/den` is an integer.
pub(crate) fn sin_pi_ratio(num: f64, den: f64) -> f64 {
    let t = num / den;
    if t.fract() == 0.0 && t * den == num {
        return 0.0;
    }
    let mut t = t - 2.0 * (t / 2.0).floor();
    let mut sign = 1.0;
    if t >= 1.0 {
        t -= 1.0;
        sign = -1.0;
    }
    sign * (PI * t.min(1.0 - t)).sin()
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Maximize a function on `[a, b]` by golden-section search.
///
/// Returns `(x, f(x))` and whether every step kept the interior best at or
/// above the bracket ends.
pub(crate) fn golden_max(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64, bool) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let fa = f(a);
    let fb = f(b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut unimodal = fc.max(fd) >= fa.max(fb);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if fc.max(fd) < fa.max(fb) {
            unimodal = false;
        }
    }
    if fc >= fd {
        (c, fc, unimodal)
    } else {
        (d, fd, unimodal)
    }
}
