//! Laplace transform of the aggregate interference seen by a user whose
//! serving base station is `r0` metres away, for one slot and jointly for
//! two slots sharing the same base-station locations.
//!
//! Interferers form a PPP of intensity `p * lambda_b` outside the disk of
//! radius `r0`; each contributes `P x^-eta g` with `g ~ Gamma(m_i, 1)`.

use alloc::format;
use alloc::vec;

use crate::math::{exp, expm1, log1p, powf, PI};
use crate::specfun::{gauss_2f1, gauss_2f1_taylor, integrate_vec, BiJet, Domain, Jet, QuadratureSpec};
use crate::{Error, Result};

/// Highest derivative order served by the jet routines.
pub const MAX_JET_ORDER: usize = 128;

/// Network deployment and radio parameters (SI units: metres, watts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkModel {
    /// Base-station intensity, per square metre.
    pub lambda_b: f64,
    /// Probability that a base station is active in a slot.
    pub p: f64,
    /// Path-loss exponent.
    pub eta: f64,
    /// Transmit power per antenna (per stream), watts.
    pub power: f64,
    /// Noise power, watts.
    pub n0: f64,
}

impl NetworkModel {
    pub fn new(lambda_b: f64, p: f64, eta: f64, power: f64, n0: f64) -> Result<Self> {
        let net = Self {
            lambda_b,
            p,
            eta,
            power,
            n0,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda_b > 0.0
            && self.lambda_b.is_finite()
            && self.p > 0.0
            && self.p <= 1.0
            && self.eta > 2.0
            && self.eta.is_finite()
            && self.power > 0.0
            && self.power.is_finite()
            && self.n0 >= 0.0
            && self.n0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid network model {self:?}")))
        }
    }

    /// Intensity of active interferers, `p * lambda_b`.
    pub fn interferer_intensity(&self) -> f64 {
        self.p * self.lambda_b
    }

    /// `2 / eta`.
    pub fn delta(&self) -> f64 {
        2.0 / self.eta
    }

    /// Mean distance to the nearest base station, `1 / (2 sqrt(lambda_b))`.
    pub fn mean_serving_distance(&self) -> f64 {
        0.5 / libm::sqrt(self.lambda_b)
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }
}

/// Argument of a single-slot transform evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtQuery {
    pub z: f64,
    pub r0: f64,
    pub m_i: u32,
}

impl LtQuery {
    pub fn validate(&self) -> Result<()> {
        if self.z >= 0.0 && self.z.is_finite() && self.r0 > 0.0 && self.r0.is_finite() && self.m_i >= 1 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid transform query {self:?}")))
        }
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_JET_ORDER {
        return Err(Error::InvalidParameter(format!(
            "derivative order {order} exceeds {MAX_JET_ORDER}"
        )));
    }
    Ok(())
}

/// Taylor coefficients in `t` of `2F1(-d, m; 1-d; -(w + step t)) - 1`.
///
/// This is the bracket of the single-slot exponent with the distances
/// normalised by `r0`: `w = z P r0^-eta`.
pub(crate) fn unit_exponent_coeffs(delta: f64, m_i: u32, w: f64, step: f64, order: usize) -> Result<alloc::vec::Vec<f64>> {
    let mut c = gauss_2f1_taylor(-delta, m_i as f64, 1.0 - delta, -w, -step, order)?;
    c[0] -= 1.0;
    Ok(c)
}

/// `E[exp(-z I) | r0]`.
pub fn lt_interference(net: &NetworkModel, q: &LtQuery) -> Result<f64> {
    net.validate()?;
    q.validate()?;
    if q.z == 0.0 {
        return Ok(1.0);
    }
    let delta = net.delta();
    let x = -q.z * net.power * powf(q.r0, -net.eta);
    let f = gauss_2f1(-delta, q.m_i as f64, 1.0 - delta, x)?;
    Ok(exp(-PI * net.interferer_intensity() * q.r0 * q.r0 * (f - 1.0)))
}

/// Jet of the transform in the variable `t`, where `z = q.z + step * t`.
pub fn lt_interference_jet_scaled(net: &NetworkModel, q: &LtQuery, step: f64, order: usize) -> Result<Jet> {
    net.validate()?;
    q.validate()?;
    check_order(order)?;
    let scale = net.power * powf(q.r0, -net.eta);
    let c = unit_exponent_coeffs(net.delta(), q.m_i, q.z * scale, step * scale, order)?;
    let a = -PI * net.interferer_intensity() * q.r0 * q.r0;
    Ok(Jet::from_coeffs(q.z, c).scale(a).exp())
}

/// Taylor jet of the transform in `z` about `q.z`; the `k`-th coefficient
/// times `k!` is the `k`-th derivative.
pub fn lt_interference_jet(net: &NetworkModel, q: &LtQuery, order: usize) -> Result<Jet> {
    lt_interference_jet_scaled(net, q, 1.0, order)
}

/// Joint transform value with its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLt {
    pub value: f64,
    pub err_estimate: f64,
    pub converged: bool,
}

/// Joint transform expansion with its quadrature error (absolute, on the
/// largest coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct JointLtBiJet {
    pub bijet: BiJet,
    pub err_estimate: f64,
    pub converged: bool,
}

/// Slot-pair parameters of the normalised radial integral.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UnitPair {
    pub p: f64,
    pub eta: f64,
    pub m: (u32, u32),
    /// `z_k P r0^-eta`
    pub w: (f64, f64),
    /// expansion steps in the same units as `w`
    pub step: (f64, f64),
}

/// Coefficients of `(1 + c (w + step t))^-m` in `t`, at `c = s^-eta`.
fn gamma_lt_coeffs(m: u32, w: f64, step: f64, c: f64, order: usize, out: &mut [f64]) -> f64 {
    let x = c * w;
    let lp = log1p(x);
    let base = exp(-(m as f64) * lp);
    let ratio = c * step / (1.0 + x);
    out[0] = base;
    let mut k = 1.0;
    for (j, o) in out[1..=order].iter_mut().enumerate() {
        let j = (j + 1) as f64;
        k *= (-(m as f64) - (j - 1.0)) / j * ratio;
        *o = k * base;
    }
    -(m as f64) * lp
}

/// BiJet of `int_1^inf bracket(s) s ds`, the joint exponent divided by
/// `-2 pi lambda r0^2`.
///
/// The bracket decays like `c = s^-eta`, so the far field falls off only as
/// `s^(1 - eta)`. Substituting `s = v^(-1 / (eta - 2))` maps it onto `(0, 1]`
/// with `s ds = (beta / c) dv`, which stays bounded as `v -> 0`.
pub(crate) fn unit_joint_exponent(pair: &UnitPair, orders: (usize, usize), spec: &QuadratureSpec) -> Result<(BiJet, f64, bool)> {
    let (n1, n2) = orders;
    let width = n2 + 1;
    let dim = (n1 + 1) * width;
    let p = pair.p;
    let beta = 1.0 / (pair.eta - 2.0);
    let mut a1 = vec![0.0; n1 + 1];
    let mut a2 = vec![0.0; n2 + 1];
    let integrand = |v: f64, out: &mut [f64]| {
        let c = powf(v, pair.eta * beta).max(f64::MIN_POSITIVE);
        let jac = beta / c;
        let l1 = gamma_lt_coeffs(pair.m.0, pair.w.0, pair.step.0, c, n1, &mut a1);
        let l2 = gamma_lt_coeffs(pair.m.1, pair.w.1, pair.step.1, c, n2, &mut a2);
        // 1 - A1 A2 and 1 - A_k through expm1 so the far field keeps its digits.
        out[0] = jac * (-p * expm1(l1 + l2) - (1.0 - p) * (expm1(l1) + expm1(l2)));
        let f1 = p * a2[0] + 1.0 - p;
        let f2 = p * a1[0] + 1.0 - p;
        for i in 1..=n1 {
            out[i * width] = -jac * a1[i] * f1;
        }
        for j in 1..=n2 {
            out[j] = -jac * a2[j] * f2;
        }
        for i in 1..=n1 {
            for j in 1..=n2 {
                out[i * width + j] = -jac * p * a1[i] * a2[j];
            }
        }
    };
    let r = integrate_vec(integrand, dim, Domain::finite(0.0, 1.0), spec)?;
    let err = r.err_estimates.iter().cloned().fold(0.0, f64::max);
    Ok((BiJet::from_row_major(orders, r.values), err, r.converged))
}

fn check_joint(net: &NetworkModel, r0: f64, z1: f64, z2: f64, m1: u32, m2: u32) -> Result<()> {
    net.validate()?;
    let ok = r0 > 0.0 && r0.is_finite() && z1 >= 0.0 && z2 >= 0.0 && z1.is_finite() && z2.is_finite() && m1 >= 1 && m2 >= 1;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "invalid joint transform arguments r0={r0}, z=({z1}, {z2}), m=({m1}, {m2})"
        )))
    }
}

/// `E[exp(-z1 I1 - z2 I2) | r0]` for two slots with independent fading and
/// independent activity but common base-station locations.
///
/// Evaluated from the radial form
/// `exp{-2 pi lambda int_r0^inf (p[1 - A1 A2] + (1-p)[1 - A1] + (1-p)[1 - A2]) x dx}`
/// with `A_k = (1 + z_k P x^-eta)^-m_k`.
pub fn joint_lt_interference(
    net: &NetworkModel,
    r0: f64,
    z1: f64,
    z2: f64,
    m_i1: u32,
    m_i2: u32,
    spec: &QuadratureSpec,
) -> Result<JointLt> {
    let b = joint_lt_interference_bijet(net, r0, z1, z2, m_i1, m_i2, (0, 0), spec)?;
    Ok(JointLt {
        value: b.bijet.value(),
        err_estimate: b.err_estimate,
        converged: b.converged,
    })
}

/// Mixed Taylor coefficients of the joint transform about `(z1, z2)`.
#[allow(clippy::too_many_arguments)]
pub fn joint_lt_interference_bijet(
    net: &NetworkModel,
    r0: f64,
    z1: f64,
    z2: f64,
    m_i1: u32,
    m_i2: u32,
    orders: (usize, usize),
    spec: &QuadratureSpec,
) -> Result<JointLtBiJet> {
    joint_lt_bijet_scaled(net, r0, (z1, z2), (1.0, 1.0), (m_i1, m_i2), orders, spec)
}

/// As [`joint_lt_interference_bijet`], in variables `t_k` with `z_k = z_k0 + step_k t_k`.
pub fn joint_lt_bijet_scaled(
    net: &NetworkModel,
    r0: f64,
    z: (f64, f64),
    step: (f64, f64),
    m: (u32, u32),
    orders: (usize, usize),
    spec: &QuadratureSpec,
) -> Result<JointLtBiJet> {
    check_joint(net, r0, z.0, z.1, m.0, m.1)?;
    check_order(orders.0)?;
    check_order(orders.1)?;
    let scale = net.power * powf(r0, -net.eta);
    let pair = UnitPair {
        p: net.p,
        eta: net.eta,
        m,
        w: (z.0 * scale, z.1 * scale),
        step: (step.0 * scale, step.1 * scale),
    };
    let (g, err, converged) = unit_joint_exponent(&pair, orders, spec)?;
    let a = -2.0 * PI * net.interferer_intensity() * r0 * r0;
    let bijet = g.scale(a).exp();
    let err_estimate = bijet.value().abs() * (a.abs() * err);
    Ok(JointLtBiJet {
        bijet,
        err_estimate,
        converged,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{atan, sqrt};

    fn net(p: f64) -> NetworkModel {
        NetworkModel::new(1e-5, p, 4.0, 1.0, 1e-12).unwrap()
    }

    #[test]
    fn unit_at_zero() {
        for m_i in 1..5 {
            let q = LtQuery { z: 0.0, r0: 123.0, m_i };
            assert_eq!(lt_interference(&net(0.7), &q).unwrap(), 1.0);
        }
    }

    #[test]
    fn rayleigh_closed_form() {
        let n = net(1.0);
        let r0 = 150.0f64;
        let q = LtQuery { z: r0.powi(4) / n.power, r0, m_i: 1 };
        let v = lt_interference(&n, &q).unwrap();
        let want = exp(-PI * n.lambda_b * r0 * r0 * PI / 4.0);
        assert!((v - want).abs() < 1e-14);
    }

    #[test]
    fn first_derivative_closed_form() {
        // m_i = 1, eta = 4: L(z) = exp(-pi lam r^2 sqrt(u) atan(sqrt(u))), u = z P r^-4
        let n = net(1.0);
        let r0 = 90.0f64;
        let z = 0.7 * r0.powi(4);
        let q = LtQuery { z, r0, m_i: 1 };
        let j = lt_interference_jet(&n, &q, 1).unwrap();
        let k = n.power / r0.powi(4);
        let u = z * k;
        let a = PI * n.lambda_b * r0 * r0;
        let g = sqrt(u) * atan(sqrt(u));
        let dg = (atan(sqrt(u)) / (2.0 * sqrt(u)) + 0.5 / (1.0 + u)) * k;
        let want = -a * dg * exp(-a * g);
        assert!((j.derivative(1) - want).abs() < 1e-8 * want.abs(), "{} vs {want}", j.derivative(1));
    }

    #[test]
    fn order_zero_jet_is_value() {
        let q = LtQuery { z: 3e8, r0: 140.0, m_i: 3 };
        let n = net(0.5);
        assert_eq!(lt_interference_jet(&n, &q, 0).unwrap().value(), lt_interference(&n, &q).unwrap());
    }

    #[test]
    fn joint_reductions() {
        let spec = QuadratureSpec::precise();
        let n = net(0.6);
        let r0 = 200.0f64;
        let z = 2.0 * r0.powi(4);
        let j = joint_lt_interference(&n, r0, z, 0.0, 2, 3, &spec).unwrap();
        let l = lt_interference(&n, &LtQuery { z, r0, m_i: 2 }).unwrap();
        assert!((j.value - l).abs() < 1e-9, "{} vs {l}", j.value);
        let one = joint_lt_interference(&n, r0, 0.0, 0.0, 2, 3, &spec).unwrap();
        assert!((one.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bijet_symmetry() {
        let spec = QuadratureSpec::precise();
        let n = net(0.8);
        let r0 = 120.0f64;
        let (z1, z2) = (0.5 * r0.powi(4), 1.7 * r0.powi(4));
        let a = joint_lt_interference_bijet(&n, r0, z1, z2, 1, 3, (2, 1), &spec).unwrap().bijet;
        let b = joint_lt_interference_bijet(&n, r0, z2, z1, 3, 1, (1, 2), &spec).unwrap().bijet;
        let bt = b.transpose();
        for (x, y) in a.as_row_major().iter().zip(bt.as_row_major()) {
            assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let n = net(1.0);
        assert!(lt_interference(&n, &LtQuery { z: -1.0, r0: 1.0, m_i: 1 }).is_err());
        assert!(lt_interference(&n, &LtQuery { z: 1.0, r0: 0.0, m_i: 1 }).is_err());
        assert!(lt_interference_jet(&n, &LtQuery { z: 1.0, r0: 1.0, m_i: 1 }, MAX_JET_ORDER + 1).is_err());
        assert!(NetworkModel::new(1e-5, 1.2, 4.0, 1.0, 0.0).is_err());
        assert!(NetworkModel::new(1e-5, 1.0, 2.0, 1.0, 0.0).is_err());
    }
}
