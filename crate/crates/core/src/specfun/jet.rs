//! Truncated Taylor arithmetic in one and two variables.
//!
//! A [`Jet`] of order `n` about `z0` stores `a_k = f^(k)(z0) / k!` for
//! `k = 0..=n`. All operations are exact truncated power-series algebra
//! (coefficient convolution), so composing them reproduces derivatives of the
//! underlying function to rounding error.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math::{exp, factorial, ln, powf};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    z0: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Builds a jet from Taylor coefficients. Panics on an empty vector.
    pub fn from_coeffs(z0: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Self { z0, coeffs }
    }

    pub fn constant(z0: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { z0, coeffs }
    }

    /// The identity function `z` about `z0`.
    pub fn variable(z0: f64, order: usize) -> Self {
        Self::affine(z0, 1.0, 0.0, order)
    }

    /// `slope * z + intercept` about `z0`.
    pub fn affine(z0: f64, slope: f64, intercept: f64, order: usize) -> Self {
        let mut j = Self::constant(z0, slope * z0 + intercept, order);
        if order >= 1 {
            j.coeffs[1] = slope;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `k`-th derivative at `z0`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs[k] * factorial(k)
    }

    pub fn scale(mut self, factor: f64) -> Self {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self
    }

    pub fn add_scalar(mut self, v: f64) -> Self {
        self.coeffs[0] += v;
        self
    }

    /// Re-expresses the jet in the variable `t` with `z = z0 + step * t`.
    pub fn rescale_variable(mut self, step: f64) -> Self {
        let mut s = 1.0;
        for c in &mut self.coeffs {
            *c *= s;
            s *= step;
        }
        self
    }

    /// Evaluates the truncated polynomial at `z`.
    pub fn eval(&self, z: f64) -> f64 {
        let dz = z - self.z0;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * dz + c)
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let a = &self.coeffs;
        let mut b = vec![0.0; n + 1];
        b[0] = exp(a[0]);
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Self { z0: self.z0, coeffs: b }
    }

    /// Natural logarithm; the constant term must be positive.
    pub fn ln(&self) -> Self {
        let n = self.order();
        let a = &self.coeffs;
        let mut b = vec![0.0; n + 1];
        b[0] = ln(a[0]);
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Self { z0: self.z0, coeffs: b }
    }

    /// Real power; the constant term must be non-zero (positive for
    /// non-integer exponents).
    pub fn powf(&self, r: f64) -> Self {
        let n = self.order();
        let a = &self.coeffs;
        let mut b = vec![0.0; n + 1];
        b[0] = powf(a[0], r);
        for k in 1..=n {
            let s: f64 = (1..=k)
                .map(|j| ((r + 1.0) * j as f64 - k as f64) * a[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a[0]);
        }
        Self { z0: self.z0, coeffs: b }
    }

    pub fn recip(&self) -> Self {
        let n = self.order();
        let a = &self.coeffs;
        let mut b = vec![0.0; n + 1];
        b[0] = 1.0 / a[0];
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s / a[0];
        }
        Self { z0: self.z0, coeffs: b }
    }

    /// Composes an outer function given by its Taylor coefficients about
    /// `self.value()` with this jet.
    pub fn compose(&self, outer: &[f64]) -> Self {
        let n = self.order();
        let mut inner = self.clone();
        inner.coeffs[0] = 0.0;
        // Horner in the increment, truncated at every step.
        let mut acc = Jet::constant(self.z0, *outer.last().unwrap_or(&0.0), n);
        for &c in outer.iter().rev().skip(1) {
            acc = &acc * &inner;
            acc.coeffs[0] += c;
        }
        acc
    }

    fn check_compatible(&self, other: &Jet) {
        assert_eq!(self.order(), other.order(), "jet orders differ");
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        Jet { z0: self.z0, coeffs }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        Jet { z0: self.z0, coeffs }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let n = self.order();
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        Jet { z0: self.z0, coeffs }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Bivariate truncated Taylor expansion about `(z1_0, z2_0)`.
///
/// Entry `(i, j)` holds `d^(i+j) f / dz1^i dz2^j / (i! j!)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiJet {
    orders: (usize, usize),
    coeffs: Vec<f64>,
}

impl BiJet {
    pub fn zeros(orders: (usize, usize)) -> Self {
        Self {
            orders,
            coeffs: vec![0.0; (orders.0 + 1) * (orders.1 + 1)],
        }
    }

    pub fn constant(orders: (usize, usize), value: f64) -> Self {
        let mut b = Self::zeros(orders);
        b.coeffs[0] = value;
        b
    }

    /// Row-major coefficients, `(orders.0 + 1)` rows of `(orders.1 + 1)`.
    pub fn from_row_major(orders: (usize, usize), coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), (orders.0 + 1) * (orders.1 + 1));
        Self { orders, coeffs }
    }

    /// `f(z1) * g(z2)`.
    pub fn outer(f: &Jet, g: &Jet) -> Self {
        let orders = (f.order(), g.order());
        let mut b = Self::zeros(orders);
        for i in 0..=orders.0 {
            for j in 0..=orders.1 {
                b.coeffs[i * (orders.1 + 1) + j] = f.coeffs[i] * g.coeffs[j];
            }
        }
        b
    }

    pub fn orders(&self) -> (usize, usize) {
        self.orders
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * (self.orders.1 + 1) + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let w = self.orders.1 + 1;
        self.coeffs[i * w + j] = v;
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Mixed partial derivative of order `(i, j)`.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) * factorial(i) * factorial(j)
    }

    pub fn scale(mut self, factor: f64) -> Self {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self
    }

    pub fn transpose(&self) -> Self {
        let (n1, n2) = self.orders;
        let mut t = Self::zeros((n2, n1));
        for i in 0..=n1 {
            for j in 0..=n2 {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Re-expresses the expansion in `(t1, t2)` with `z_k = z_k0 + step_k * t_k`.
    pub fn rescale_variables(mut self, step1: f64, step2: f64) -> Self {
        let (n1, n2) = self.orders;
        let mut s1 = 1.0;
        for i in 0..=n1 {
            let mut s2 = 1.0;
            for j in 0..=n2 {
                let v = self.get(i, j) * s1 * s2;
                self.set(i, j, v);
                s2 *= step2;
            }
            s1 *= step1;
        }
        self
    }

    /// Slice `z2 = z2_0` as a univariate jet in `z1`.
    pub fn first_axis(&self, z0: f64) -> Jet {
        Jet::from_coeffs(z0, (0..=self.orders.0).map(|i| self.get(i, 0)).collect())
    }

    pub fn exp(&self) -> Self {
        let (n1, n2) = self.orders;
        let a = self;
        let mut b = Self::zeros(self.orders);
        b.set(0, 0, exp(a.get(0, 0)));
        // Row 0: univariate recurrence in z2.
        for j in 1..=n2 {
            let s: f64 = (1..=j).map(|q| q as f64 * a.get(0, q) * b.get(0, j - q)).sum();
            b.set(0, j, s / j as f64);
        }
        // d/dz1 exp(A) = A_z1 exp(A), matched coefficient by coefficient.
        for i in 1..=n1 {
            for j in 0..=n2 {
                let mut s = 0.0;
                for p in 1..=i {
                    for q in 0..=j {
                        s += p as f64 * a.get(p, q) * b.get(i - p, j - q);
                    }
                }
                b.set(i, j, s / i as f64);
            }
        }
        b
    }
}

impl Add for &BiJet {
    type Output = BiJet;
    fn add(self, rhs: &BiJet) -> BiJet {
        assert_eq!(self.orders, rhs.orders, "bijet orders differ");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        BiJet { orders: self.orders, coeffs }
    }
}

impl Mul for &BiJet {
    type Output = BiJet;
    fn mul(self, rhs: &BiJet) -> BiJet {
        assert_eq!(self.orders, rhs.orders, "bijet orders differ");
        let (n1, n2) = self.orders;
        let mut out = BiJet::zeros(self.orders);
        for i in 0..=n1 {
            for j in 0..=n2 {
                let mut s = 0.0;
                for p in 0..=i {
                    for q in 0..=j {
                        s += self.get(p, q) * rhs.get(i - p, j - q);
                    }
                }
                out.set(i, j, s);
            }
        }
        out
    }
}
