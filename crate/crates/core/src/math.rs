//! Thin aliases over `libm` so the numeric code reads the same with or without std.

#[cfg(test)]
pub(crate) use libm::atan;
pub(crate) use libm::{erfc, exp, expm1, log as ln, log1p, pow as powf, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
pub(crate) fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

pub(crate) fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == libm::floor(x)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}
