//! Classical special functions used as building blocks.

use crate::error::{domain, Result};

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_sign(x: f64) -> (f64, f64) {
    let (lg, s) = libm::lgamma_r(x);
    (lg, if s < 0 { -1.0 } else { 1.0 })
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `1/Γ(x)`, which is entire: zero at the non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x.abs() < 170.0 {
        return 1.0 / libm::tgamma(x);
    }
    let (lg, s) = ln_gamma_sign(x);
    s * (-lg).exp()
}

/// Euler beta function for positive arguments.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta({a}, {b}) needs positive arguments"));
    }
    if a + b < 140.0 {
        Ok(gamma(a) * gamma(b) / gamma(a + b))
    } else {
        Ok(ln_beta(a, b).exp())
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Rising factorial `(a)_n`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for k in 0..n {
        acc *= a + k as f64;
        if !acc.is_finite() {
            let (l1, s1) = ln_gamma_sign(a + n as f64);
            let (l0, s0) = ln_gamma_sign(a);
            return s1 * s0 * (l1 - l0).exp();
        }
    }
    acc
}

/// Generalized binomial coefficient `C(nu, k)`.
pub fn binomial(nu: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc *= (nu - j as f64) / (j as f64 + 1.0);
    }
    acc
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of the absolute values of everything added so far.
    pub fn abs_total(&self) -> f64 {
        self.abs
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`.
pub fn inc_beta_reg(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("incomplete beta needs a, b > 0 (got {a}, {b})"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("incomplete beta needs 0 <= x <= 1 (got {x})"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(x, a, b)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a)? / b)
    }
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..5000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        for coef in [num, -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0))] {
            d = 1.0 + coef * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + coef / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
        }
        if (d * c - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(crate::error::Error::NonConvergence(format!("incomplete beta continued fraction at x={x}, a={a}, b={b}")))
}
