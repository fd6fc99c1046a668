//! Gauss and Kummer hypergeometric functions for real arguments.

use crate::math::{exp, is_non_positive_integer, ln, ln_gamma_signed, powf};
use crate::{Error, Result};

const MAX_TERMS: usize = 200_000;
const SERIES_EPS: f64 = 1e-17;

/// Magnitude at which the Pfaff-transformed series hands over to the
/// expansion in `1/x`.
const LARGE_ARGUMENT: f64 = 2.0;

fn invalid(msg: alloc::string::String) -> Error {
    Error::InvalidParameter(msg)
}

/// Direct power series of `2F1(a, b; c; x)` for `|x| < 1`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_non_positive_integer(c) {
        return Err(invalid(alloc::format!("2F1: c = {c} is a non-positive integer")));
    }
    if x.abs() >= 1.0 && !(is_non_positive_integer(a) || is_non_positive_integer(b)) {
        return Err(invalid(alloc::format!("2F1 series needs |x| < 1, got {x}")));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    // Keep going past a tiny term only while the ratio is still shrinking.
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= SERIES_EPS * sum.abs() {
            let ratio = ((a + nf + 1.0) * (b + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * x).abs();
            if ratio < 1.0 {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence("2F1 power series"))
}

/// `2F1(a, b; c; x)` for `x <= 0`.
///
/// Uses the Pfaff transformation
/// `2F1(a, b; c; x) = (1 - x)^(-b) 2F1(c - a, b; c; x / (x - 1))`, which maps
/// every non-positive argument into `[0, 1)`. For `x < -2` the transformed
/// argument approaches one and the series slows down, so the analytic
/// continuation in `1/x` is used instead whenever `b - a` is not an integer.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_non_positive_integer(c) {
        return Err(invalid(alloc::format!("2F1: c = {c} is a non-positive integer")));
    }
    if !x.is_finite() || x > 0.0 {
        return Err(invalid(alloc::format!("2F1 is implemented for finite x <= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if is_non_positive_integer(a) || is_non_positive_integer(b) {
        return terminating_2f1(a, b, c, x);
    }
    let ba = b - a;
    if x < -LARGE_ARGUMENT && ba != libm::round(ba) {
        return large_argument_2f1(a, b, c, x);
    }
    pfaff_2f1(a, b, c, x)
}

/// Pfaff route for every `x <= 0`; exposed for cross-checks.
pub fn pfaff_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let y = x / (x - 1.0);
    let s = hyp2f1_series(c - a, b, c, y)?;
    Ok(powf(1.0 - x, -b) * s)
}

fn terminating_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let n = if is_non_positive_integer(a) { -a } else { -b } as usize;
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
    }
    Ok(sum)
}

/// `Gamma(p1) Gamma(p2) / (Gamma(q1) Gamma(q2))`, zero when a denominator
/// argument is a pole.
fn gamma_ratio(p1: f64, p2: f64, q1: f64, q2: f64) -> f64 {
    if is_non_positive_integer(q1) || is_non_positive_integer(q2) {
        return 0.0;
    }
    let (l1, s1) = ln_gamma_signed(p1);
    let (l2, s2) = ln_gamma_signed(p2);
    let (l3, s3) = ln_gamma_signed(q1);
    let (l4, s4) = ln_gamma_signed(q2);
    s1 * s2 * s3 * s4 * exp(l1 + l2 - l3 - l4)
}

fn large_argument_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let w = 1.0 / x;
    let mx = -x;
    let t1 = gamma_ratio(c, b - a, b, c - a);
    let t2 = gamma_ratio(c, a - b, a, c - b);
    let mut v = 0.0;
    if t1 != 0.0 {
        v += t1 * exp(-a * ln(mx)) * hyp2f1_series(a, a - c + 1.0, a - b + 1.0, w)?;
    }
    if t2 != 0.0 {
        v += t2 * exp(-b * ln(mx)) * hyp2f1_series(b, b - c + 1.0, b - a + 1.0, w)?;
    }
    Ok(v)
}

/// Taylor coefficients of `u -> 2F1(a, b; c; x0 + step * u)` about `u = 0`.
///
/// Uses `d/dx 2F1(a, b; c; x) = (a b / c) 2F1(a + 1, b + 1; c + 1; x)`.
pub fn gauss_2f1_taylor(a: f64, b: f64, c: f64, x0: f64, step: f64, order: usize) -> Result<alloc::vec::Vec<f64>> {
    let mut out = alloc::vec::Vec::with_capacity(order + 1);
    let mut pref = 1.0;
    for k in 0..=order {
        let kf = k as f64;
        if k > 0 {
            pref *= (a + kf - 1.0) * (b + kf - 1.0) / ((c + kf - 1.0) * kf) * step;
        }
        let v = if pref == 0.0 { 0.0 } else { pref * gauss_2f1(a + kf, b + kf, c + kf, x0)? };
        out.push(v);
    }
    Ok(out)
}

/// Kummer's confluent hypergeometric function `1F1(a; b; x)`.
///
/// A non-positive integer `a` gives the terminating polynomial exactly. A
/// negative argument goes through Kummer's transformation
/// `1F1(a; b; x) = e^x 1F1(b - a; b; -x)` so the series never alternates.
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if is_non_positive_integer(b) {
        return Err(invalid(alloc::format!("1F1: b = {b} is a non-positive integer")));
    }
    if !x.is_finite() {
        return Err(invalid(alloc::format!("1F1: non-finite argument {x}")));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if is_non_positive_integer(a) {
        return Ok(kummer_polynomial(a, b, x));
    }
    if x < 0.0 {
        let ba = b - a;
        let inner = if ba == 0.0 {
            1.0
        } else if is_non_positive_integer(ba) {
            kummer_polynomial(ba, b, -x)
        } else {
            kummer_positive(ba, b, -x)?
        };
        return Ok(exp(x) * inner);
    }
    kummer_positive(a, b, x)
}

/// `1F1(-n; b; x)` as the finite sum `sum_k (-n)_k / ((b)_k k!) x^k`.
pub fn kummer_polynomial(a: f64, b: f64, x: f64) -> f64 {
    let n = (-a) as usize;
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * x;
        sum += term;
    }
    sum
}

fn kummer_positive(a: f64, b: f64, x: f64) -> Result<f64> {
    if x > 60.0 + 2.0 * (a.abs() + b.abs()) {
        if let Some(v) = kummer_asymptotic(a, b, x) {
            return Ok(v);
        }
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) / ((b + nf) * (nf + 1.0)) * x;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() && nf + 1.0 > x {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("1F1 power series"))
}

/// Large-`x` expansion `Gamma(b)/Gamma(a) e^x x^(a-b) sum (b-a)_n (1-a)_n / n! x^-n`,
/// truncated at its smallest term. `None` if the terms never get small enough.
fn kummer_asymptotic(a: f64, b: f64, x: f64) -> Option<f64> {
    let (lb, sb) = ln_gamma_signed(b);
    let (la, sa) = ln_gamma_signed(a);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for n in 0..200 {
        let nf = n as f64;
        term *= (b - a + nf) * (1.0 - a + nf) / ((nf + 1.0) * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            return Some(sb * sa * exp(lb - la + x + (a - b) * ln(x)) * sum);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{atan, sqrt, PI};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_argument() {
        assert_eq!(gauss_2f1(0.3, 1.7, 2.2, 0.0).unwrap(), 1.0);
        assert_eq!(kummer_1f1(0.3, 1.7, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn arctan_identity() {
        // 2F1(-1/2, 1; 1/2; -z) = 1 + sqrt(z) atan(sqrt(z))
        for z in [1e-3, 0.25, 1.0, 1.9, 2.5, 10.0, 1e3, 1e6, 1e10] {
            let v = gauss_2f1(-0.5, 1.0, 0.5, -z).unwrap();
            let want = 1.0 + sqrt(z) * atan(sqrt(z));
            assert!(rel(v, want) < 1e-12, "z={z}: {v} vs {want}");
        }
        let v = gauss_2f1(-0.5, 1.0, 0.5, -1.0).unwrap();
        assert!((v - (1.0 + PI / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn direct_series_small_argument() {
        // Term-by-term summation, written out independently of hyp2f1_series.
        let (a, b, c, x) = (-0.5f64, 2.0f64, 0.5f64, -0.25f64);
        let mut want = 0.0;
        let mut t = 1.0;
        for n in 0..200 {
            want += t;
            let nf = n as f64;
            t = t * (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        }
        let v = gauss_2f1(a, b, c, x).unwrap();
        assert!((v - want).abs() < 1e-10);
    }

    #[test]
    fn continuation_is_continuous_at_the_switch() {
        for (a, b, c) in [(-0.5, 3.0, 0.5), (-0.4, 7.0, 0.6), (0.5, 2.0, 1.5)] {
            let lo = pfaff_2f1(a, b, c, -LARGE_ARGUMENT - 1e-9).unwrap();
            let hi = large_argument_2f1(a, b, c, -LARGE_ARGUMENT - 1e-9).unwrap();
            assert!(rel(hi, lo) < 1e-11, "({a},{b},{c}): {lo} vs {hi}");
            for x in [-3.0, -10.0, -200.0] {
                let p = pfaff_2f1(a, b, c, x).unwrap();
                let l = large_argument_2f1(a, b, c, x).unwrap();
                assert!(rel(p, l) < 1e-10, "x={x}: {p} vs {l}");
            }
        }
    }

    #[test]
    fn c_pole_rejected() {
        assert!(gauss_2f1(0.5, 1.0, -2.0, -0.5).is_err());
        assert!(kummer_1f1(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn positive_argument_rejected() {
        assert!(gauss_2f1(0.5, 1.0, 1.5, 0.5).is_err());
    }

    #[test]
    fn kummer_terminating_cases() {
        assert_eq!(kummer_1f1(0.0, 1.5, 7.3).unwrap(), 1.0);
        let want = 1.0 - 2.0 * (1.0 / 1.5) + (2.0 * 1.0 / (1.5 * 2.5)) * 0.5;
        assert!((kummer_1f1(-2.0, 1.5, 1.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn kummer_transformation_for_negative_argument() {
        // 1F1(1; 2; x) = (e^x - 1) / x
        for x in [-0.5, -5.0, -40.0, -300.0] {
            let v = kummer_1f1(1.0, 2.0, x).unwrap();
            let want = (exp(x) - 1.0) / x;
            assert!(rel(v, want) < 1e-13, "x={x}");
        }
        // 1F1(m + 1; 2; -X) = e^-X 1F1(1 - m; 2; X), a polynomial times e^-X
        let v = kummer_1f1(4.0, 2.0, -50.0).unwrap();
        assert!(rel(v, exp(-50.0) * kummer_polynomial(-2.0, 2.0, 50.0)) < 1e-13);
    }

    #[test]
    fn kummer_positive_argument() {
        // 1F1(a; a; x) = e^x
        for x in [0.1, 3.0, 30.0, 150.0] {
            let v = kummer_1f1(2.5, 2.5, x).unwrap();
            assert!(rel(v, exp(x)) < 1e-10, "x={x}: {v}");
        }
        // 1F1(1/2; 3/2; x) = sqrt(pi) erfi(sqrt(x)) / (2 sqrt(x)); check the asymptotic branch against the series
        let a = kummer_asymptotic(0.5, 1.5, 200.0).unwrap();
        let mut s = 1.0;
        let mut t = 1.0;
        for n in 0..2000 {
            let nf = n as f64;
            t *= (0.5 + nf) / ((1.5 + nf) * (nf + 1.0)) * 200.0;
            s += t;
        }
        assert!(rel(a, s) < 1e-10);
    }

    #[test]
    fn taylor_coefficients_follow_the_derivative_rule() {
        // Finite-difference oracle for the first derivative at x0 = -1.
        let (a, b, c) = (-0.5, 1.0, 0.5);
        let co = gauss_2f1_taylor(a, b, c, -1.0, 1.0, 1).unwrap();
        let h = 1e-5;
        let fd = (gauss_2f1(a, b, c, -1.0 + h).unwrap() - gauss_2f1(a, b, c, -1.0 - h).unwrap()) / (2.0 * h);
        assert!(rel(co[1], fd) < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn pfaff_agrees_with_direct_series(x in -0.9f64..-1e-6, a in -0.9f64..-0.05, m in 1u32..9) {
            let (b, c) = (m as f64, 1.0 + a);
            let s = hyp2f1_series(a, b, c, x).unwrap();
            let p = pfaff_2f1(a, b, c, x).unwrap();
            proptest::prop_assert!(rel(p, s) < 1e-9, "{p} vs {s}");
        }
    }
}
