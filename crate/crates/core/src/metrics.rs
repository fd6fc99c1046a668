//! Average symbol error probability, outage, ergodic rate, coverage with one
//! retransmission, SM-MIMO pairwise error and throughput.
//!
//! All averages over the serving distance `x ~ 2 pi lambda_b x exp(-pi lambda_b x^2)`
//! are taken in the variable `v = pi lambda_b x^2`, which turns the distance
//! density into `exp(-v)` on `[0, inf)`.

use alloc::vec::Vec;
use alloc::format;

use crate::interference::{unit_exponent_coeffs, unit_joint_exponent, NetworkModel, UnitPair, MAX_JET_ORDER};
use crate::math::{exp, expm1, ln_gamma, log1p, powf, PI};
use crate::schemes::{Exactness, GammaParams, MimoScheme, Modulation};
use crate::specfun::{gauss_2f1, integrate, kummer_1f1, kummer_polynomial, BiJet, Domain, Jet, Quadrature, QuadratureSpec};
use crate::{Error, Result};

/// Something a caller should know about how a value was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// A quadrature ran out of subdivisions before meeting its tolerance.
    QuadratureNotConverged { stage: &'static str, err_estimate: f64 },
    /// The exact ASEP was replaced by the Jensen form.
    JensenSubstituted { m_o: u32 },
    /// A probability landed outside `[0, 1]` by more than its error estimate.
    OutsideUnitInterval { value: f64 },
    /// The gamma reduction of the scheme is an approximation.
    ApproximateGammaMapping,
    /// The value was clamped into `[0, 1]`.
    Clamped { raw: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    pub err_estimate: f64,
    pub exactness: Exactness,
    pub diagnostics: Vec<Diagnostic>,
}

impl MetricResult {
    fn new(value: f64, err: f64, exactness: Exactness, mut diagnostics: Vec<Diagnostic>) -> Self {
        if exactness == Exactness::Approximate {
            diagnostics.push(Diagnostic::ApproximateGammaMapping);
        }
        Self {
            value,
            err_estimate: err,
            exactness,
            diagnostics,
        }
    }

    fn probability(mut self) -> Self {
        if self.value < -self.err_estimate || self.value > 1.0 + self.err_estimate {
            self.diagnostics.push(Diagnostic::OutsideUnitInterval { value: self.value });
        }
        self
    }

    pub fn converged(&self) -> bool {
        !self
            .diagnostics
            .iter()
            .any(|d| matches!(d, Diagnostic::QuadratureNotConverged { .. } | Diagnostic::OutsideUnitInterval { .. }))
    }
}

/// How to evaluate the `erfc^2` expectation of the ASEP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsepMethod {
    /// Both nested terms.
    Exact,
    /// `E[erfc^2] ~ E[erfc]^2`.
    Jensen,
    /// `Exact` for `m_o <= 4`, `Jensen` above.
    Auto,
}

impl AsepMethod {
    pub const AUTO_EXACT_MAX_MO: u32 = 4;

    /// The method actually used at diversity `m_o`.
    pub fn resolve(self, m_o: u32) -> AsepMethod {
        match self {
            AsepMethod::Auto if m_o <= Self::AUTO_EXACT_MAX_MO => AsepMethod::Exact,
            AsepMethod::Auto => AsepMethod::Jensen,
            m => m,
        }
    }
}

/// Collects quadrature errors and convergence failures.
#[derive(Default)]
struct Tally {
    diagnostics: Vec<Diagnostic>,
}

impl Tally {
    fn take(&mut self, stage: &'static str, q: &Quadrature) -> f64 {
        if !q.converged && !self.diagnostics.iter().any(|d| matches!(d, Diagnostic::QuadratureNotConverged { stage: s, .. } if *s == stage)) {
            self.diagnostics.push(Diagnostic::QuadratureNotConverged {
                stage,
                err_estimate: q.err_estimate,
            });
        }
        q.value
    }
}

fn inner_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    spec.with_rel_tol(spec.rel_tol * 0.1)
}

/// `2F1(-d, m_i; 1-d; -y) - 1`, the interference exponent bracket.
fn bracket(net: &NetworkModel, m_i: u32, y: f64) -> Result<f64> {
    let d = net.delta();
    Ok(gauss_2f1(-d, m_i as f64, 1.0 - d, -y)? - 1.0)
}

/// Serving-distance average of `exp(-z N0 x^eta / (beta P)) L(z x^eta / (beta P))`.
fn noisy_lt_average(net: &NetworkModel, m_i: u32, beta: f64, z: f64, spec: &QuadratureSpec, tally: &mut Tally) -> Result<f64> {
    let g = bracket(net, m_i, z / beta)?;
    let rate = 1.0 + net.p * g;
    if net.n0 == 0.0 || z == 0.0 {
        return Ok(1.0 / rate);
    }
    // x^eta = (v / (pi lambda_b))^(eta/2)
    let noise = z * net.n0 / (beta * net.power) * powf(PI * net.lambda_b, -net.eta / 2.0);
    let half_eta = net.eta / 2.0;
    let q = integrate(
        |v| exp(-v * rate - noise * powf(v, half_eta)),
        Domain::upper_infinite(0.0, 1.0 / rate),
        spec,
    )?;
    Ok(tally.take("serving distance", &q))
}

/// `E[erfc(sqrt(beta SINR))]` and, when asked, `E[erfc^2(sqrt(beta SINR))]`.
fn erfc_moments(
    net: &NetworkModel,
    gp: &GammaParams,
    beta: f64,
    second: bool,
    spec: &QuadratureSpec,
    tally: &mut Tally,
) -> Result<(f64, Option<f64>, f64)> {
    let m = gp.m_o as f64;
    let inner = inner_spec(spec);
    let ratio = exp(ln_gamma(m + 0.5) - ln_gamma(m));

    // z = u^2 removes the z^-1/2 endpoint singularity.
    let mut failure = None;
    let q1 = integrate(
        |u| {
            let z = u * u;
            match noisy_lt_average(net, gp.m_i, beta, z, &inner, tally) {
                Ok(k) => 2.0 * exp(-z) * kummer_polynomial(1.0 - m, 1.5, z) * k,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        Domain::upper_infinite(0.0, 1.0),
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let i1 = tally.take("erfc term", &q1);
    let t1 = 1.0 - ratio * 2.0 / PI * i1;
    let mut err = ratio * 2.0 / PI * q1.err_estimate;

    if !second {
        return Ok((t1, None, err));
    }

    // The theta-integral over [0, pi/4] becomes, with cot(theta) = w / u,
    // 2 int_u^inf exp(-(u^2 + w^2)) 1F1(1 - m; 2; u^2 + w^2) dw.
    let mut failure = None;
    let q2 = integrate(
        |u| {
            let k = match noisy_lt_average(net, gp.m_i, beta, u * u, &inner, tally) {
                Ok(k) => k,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            };
            let wq = integrate(
                |w| match kummer_1f1(m + 1.0, 2.0, -(u * u + w * w)) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                Domain::upper_infinite(u, 1.0),
                &inner,
            );
            match wq {
                Ok(q) => 2.0 * tally.take("erfc^2 angle", &q) * k,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        Domain::upper_infinite(0.0, 1.0),
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let i2 = tally.take("erfc^2 term", &q2);
    let t2 = 1.0 - 4.0 * m / PI * i2;
    err += 4.0 * m / PI * q2.err_estimate;
    Ok((t1, Some(t2), err))
}

/// Average symbol error probability of square M-QAM,
/// `w1 E[erfc(sqrt(beta SINR))] + w2 E[erfc^2(sqrt(beta SINR))]`, with the
/// interfering symbols treated as Gaussian.
pub fn asep(net: &NetworkModel, gp: &GammaParams, modulation: &Modulation, method: AsepMethod, spec: &QuadratureSpec) -> Result<MetricResult> {
    net.validate()?;
    check_gp(gp)?;
    let mut tally = Tally::default();
    let resolved = method.resolve(gp.m_o);
    if method == AsepMethod::Auto && resolved == AsepMethod::Jensen {
        tally.diagnostics.push(Diagnostic::JensenSubstituted { m_o: gp.m_o });
    }
    let (value, err) = match resolved {
        AsepMethod::Exact => {
            let (t1, t2, err) = erfc_moments(net, gp, modulation.beta, true, spec, &mut tally)?;
            let t2 = t2.unwrap_or(0.0);
            (modulation.w1 * t1 + modulation.w2 * t2, err * modulation.w1.max(-modulation.w2))
        }
        _ => {
            let (t1, _, err) = erfc_moments(net, gp, modulation.beta, false, spec, &mut tally)?;
            (
                modulation.w1 * t1 + modulation.w2 * t1 * t1,
                err * (modulation.w1 + 2.0 * modulation.w2.abs() * t1.abs()),
            )
        }
    };
    Ok(MetricResult::new(value, err, gp.exactness, tally.diagnostics).probability())
}

fn check_gp(gp: &GammaParams) -> Result<()> {
    if gp.m_o == 0 || gp.m_i == 0 {
        return Err(Error::InvalidParameter(format!("gamma shapes must be >= 1: {gp:?}")));
    }
    if (gp.m_o - 1) as usize > MAX_JET_ORDER {
        return Err(Error::InvalidParameter(format!("m_o = {} exceeds {}", gp.m_o, MAX_JET_ORDER + 1)));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("SIR threshold must be positive, got {theta}")))
    }
}

/// `sum_j (-1)^j c_j` over the coefficients of a jet in the relative
/// variable: the truncated expansion evaluated back at `z = 0`.
fn alternating_sum(c: &[f64]) -> f64 {
    c.iter().enumerate().map(|(j, v)| if j % 2 == 0 { *v } else { -*v }).sum()
}

/// Single-slot coverage integrand: the `j < m_o` derivative sum of the
/// transform at `z = theta x^eta / P`, expressed in `t` with `z = z0 (1 + t)`.
/// Along this path the hypergeometric argument is `-theta (1 + t)`, so the
/// bracket jet is shared by every serving distance.
fn marginal_bracket(net: &NetworkModel, gp: &GammaParams, theta: f64) -> Result<Jet> {
    let c = unit_exponent_coeffs(net.delta(), gp.m_i, theta, theta, (gp.m_o - 1) as usize)?;
    Ok(Jet::from_coeffs(0.0, c))
}

fn marginal_sum(bracket: &Jet, p: f64, v: f64) -> f64 {
    alternating_sum(bracket.clone().scale(-p * v).exp().coeffs())
}

/// Probability that the per-stream SIR falls below `theta` (interference
/// limited).
pub fn outage(net: &NetworkModel, gp: &GammaParams, theta: f64, spec: &QuadratureSpec) -> Result<MetricResult> {
    net.validate()?;
    check_gp(gp)?;
    check_theta(theta)?;
    let mut tally = Tally::default();
    let g = marginal_bracket(net, gp, theta)?;
    let q = integrate(|v| exp(-v) * marginal_sum(&g, net.p, v), Domain::upper_infinite(0.0, 1.0), spec)?;
    let coverage = tally.take("serving distance", &q);
    Ok(MetricResult::new(1.0 - coverage, q.err_estimate, gp.exactness, tally.diagnostics).probability())
}

/// Ergodic rate `E[ln(1 + SIR)]` of one stream, in nats.
pub fn ergodic_rate(net: &NetworkModel, gp: &GammaParams, spec: &QuadratureSpec) -> Result<MetricResult> {
    net.validate()?;
    check_gp(gp)?;
    let mut tally = Tally::default();
    let m = gp.m_o as f64;
    let mut failure = None;
    let q = integrate(
        |z| {
            if z == 0.0 {
                return m;
            }
            let g = match bracket(net, gp.m_i, z) {
                Ok(g) => g,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            };
            // The distance average of exp(-v rate) is 1 / rate.
            let k = 1.0 / (1.0 + net.p * g);
            -expm1(-m * log1p(z)) / z * k
        },
        Domain::upper_infinite(0.0, 1.0),
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let value = tally.take("rate", &q);
    Ok(MetricResult::new(value, q.err_estimate, gp.exactness, tally.diagnostics))
}

/// Per-cell rate in bits per channel use from a per-stream rate in nats.
pub fn per_cell_rate_bits(rate_nats: f64, scheme: &MimoScheme) -> f64 {
    rate_nats * scheme.symbols_per_channel_use() / core::f64::consts::LN_2
}

/// Whether the second-slot interference is correlated with the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetxMode {
    /// Shared base-station locations (the physical model).
    Correlated,
    /// Joint term replaced by the product of the marginals.
    Independent,
}

/// Two transmission attempts with possibly different schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetxConfig {
    pub slot1: GammaParams,
    pub slot2: GammaParams,
    /// Linear SIR threshold.
    pub theta: f64,
    pub net: NetworkModel,
}

fn joint_exponent(net: &NetworkModel, m_i: (u32, u32), w: (f64, f64), step: (f64, f64), orders: (usize, usize), spec: &QuadratureSpec, tally: &mut Tally) -> Result<BiJet> {
    let pair = UnitPair {
        p: net.p,
        eta: net.eta,
        m: m_i,
        w,
        step,
    };
    let (h, err, converged) = unit_joint_exponent(&pair, orders, spec)?;
    if !converged {
        tally.diagnostics.push(Diagnostic::QuadratureNotConverged {
            stage: "joint radial integral",
            err_estimate: err,
        });
    }
    Ok(h)
}

fn joint_sum(h: &BiJet, p: f64, v: f64) -> f64 {
    // Joint exponent is -2 pi lambda x^2 H = -2 p v H.
    let e = h.clone().scale(-2.0 * p * v).exp();
    let (n1, n2) = e.orders();
    let mut s = 0.0;
    for i in 0..=n1 {
        for j in 0..=n2 {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * e.get(i, j);
        }
    }
    s
}

/// Coverage `P(SIR1 > theta) + P(SIR2 > theta) - P(both)` with one
/// retransmission and independent decoding of the two attempts.
pub fn coverage_retx(cfg: &RetxConfig, mode: RetxMode, spec: &QuadratureSpec) -> Result<MetricResult> {
    let net = &cfg.net;
    net.validate()?;
    check_gp(&cfg.slot1)?;
    check_gp(&cfg.slot2)?;
    check_theta(cfg.theta)?;
    let mut tally = Tally::default();
    let theta = cfg.theta;
    let g1 = marginal_bracket(net, &cfg.slot1, theta)?;
    let g2 = marginal_bracket(net, &cfg.slot2, theta)?;
    let h = match mode {
        RetxMode::Correlated => Some(joint_exponent(
            net,
            (cfg.slot1.m_i, cfg.slot2.m_i),
            (theta, theta),
            (theta, theta),
            ((cfg.slot1.m_o - 1) as usize, (cfg.slot2.m_o - 1) as usize),
            &inner_spec(spec),
            &mut tally,
        )?),
        RetxMode::Independent => None,
    };
    let q = integrate(
        |v| {
            let s1 = marginal_sum(&g1, net.p, v);
            let s2 = marginal_sum(&g2, net.p, v);
            let s12 = match &h {
                Some(h) => joint_sum(h, net.p, v),
                None => s1 * s2,
            };
            exp(-v) * (s1 + s2 - s12)
        },
        Domain::upper_infinite(0.0, 1.0),
        spec,
    )?;
    let value = tally.take("serving distance", &q);
    let exactness = cfg.slot1.exactness.max(cfg.slot2.exactness);
    Ok(MetricResult::new(value, q.err_estimate, exactness, tally.diagnostics).probability())
}

/// Single-slot coverage computed through the two-slot machinery with the
/// second slot switched off (`z2 = 0`): the radial-integral route to
/// `1 - outage`.
pub fn coverage_single_via_joint(net: &NetworkModel, gp: &GammaParams, theta: f64, spec: &QuadratureSpec) -> Result<MetricResult> {
    net.validate()?;
    check_gp(gp)?;
    check_theta(theta)?;
    let mut tally = Tally::default();
    let h = joint_exponent(net, (gp.m_i, 1), (theta, 0.0), (theta, 1.0), ((gp.m_o - 1) as usize, 0), &inner_spec(spec), &mut tally)?;
    let q = integrate(|v| exp(-v) * joint_sum(&h, net.p, v), Domain::upper_infinite(0.0, 1.0), spec)?;
    let value = tally.take("serving distance", &q);
    Ok(MetricResult::new(value, q.err_estimate, gp.exactness, tally.diagnostics).probability())
}

fn sm_params(scheme: &MimoScheme) -> Result<GammaParams> {
    match scheme {
        MimoScheme::SmMimo { .. } => scheme.gamma_params(),
        other => Err(Error::InvalidParameter(format!("pairwise error needs an SM-MIMO scheme, got {other}"))),
    }
}

/// Average pairwise error probability between two SM-MIMO codewords at
/// distance `e_norm`, `1/2 E[erfc(sqrt(||e||^2 SINR / 4))]`.
pub fn apep_sm(net: &NetworkModel, scheme: &MimoScheme, e_norm: f64, spec: &QuadratureSpec) -> Result<MetricResult> {
    net.validate()?;
    let gp = sm_params(scheme)?;
    if e_norm.is_nan() || e_norm <= 0.0 {
        return Err(Error::InvalidParameter(format!("codeword distance must be positive, got {e_norm}")));
    }
    if !e_norm.is_finite() {
        return Ok(MetricResult::new(0.0, 0.0, gp.exactness, Vec::new()));
    }
    let mut tally = Tally::default();
    let beta = e_norm * e_norm / 4.0;
    let (t1, _, err) = erfc_moments(net, &gp, beta, false, spec, &mut tally)?;
    Ok(MetricResult::new(0.5 * t1, 0.5 * err, gp.exactness, tally.diagnostics).probability())
}

/// Nearest-neighbour ASEP of SM-MIMO with joint ML detection:
/// `n_dmin * APEP(d_min)`, clamped to `[0, 1]`.
pub fn asep_sm(net: &NetworkModel, scheme: &MimoScheme, modulation: &Modulation, spec: &QuadratureSpec) -> Result<MetricResult> {
    let mut r = apep_sm(net, scheme, modulation.d_min, spec)?;
    let raw = modulation.n_dmin * r.value;
    r.err_estimate *= modulation.n_dmin;
    r.value = raw.clamp(0.0, 1.0);
    if r.value != raw {
        r.diagnostics.push(Diagnostic::Clamped { raw });
    }
    Ok(r)
}

/// Successfully delivered bits per channel use of one stream,
/// `log2(M) (1 - ASEP)`.
pub fn throughput(asep_value: f64, modulation: &Modulation) -> Result<f64> {
    if !(0.0..=1.0).contains(&asep_value) {
        return Err(Error::InvalidParameter(format!("ASEP must lie in [0, 1], got {asep_value}")));
    }
    Ok(modulation.bits_per_symbol() * (1.0 - asep_value))
}

/// Single-slot coverage in closed form after the distance average,
/// `sum_j (-1)^j [1 / (1 + p G(t))]_j`; used as a cross-check of the
/// quadrature route.
pub fn coverage_closed_form(net: &NetworkModel, gp: &GammaParams, theta: f64) -> Result<f64> {
    check_gp(gp)?;
    check_theta(theta)?;
    let g = marginal_bracket(net, gp, theta)?;
    let d = g.scale(net.p).add_scalar(1.0).recip();
    Ok(alternating_sum(d.coeffs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{atan, sqrt};
    use crate::schemes::qam;

    fn net() -> NetworkModel {
        NetworkModel::new(1e-5, 1.0, 4.0, 1.0, 0.0).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn siso_outage_closed_form() {
        for theta_db in [-5.0, 0.0, 5.0, 10.0] {
            let theta = powf(10.0, theta_db / 10.0);
            let s = sqrt(theta);
            let expect = 1.0 - 1.0 / (1.0 + s * (PI / 2.0 - atan(1.0 / s)));
            let got = outage(&net(), &GammaParams::new(1, 1).unwrap(), theta, &spec()).unwrap();
            assert!((got.value - expect).abs() < 1e-9, "{theta_db} dB: {} vs {expect}", got.value);
        }
    }

    #[test]
    fn outage_quadrature_matches_closed_form() {
        for (mo, mi) in [(2, 1), (4, 2), (8, 3), (16, 1)] {
            let gp = GammaParams::new(mo, mi).unwrap();
            let q = outage(&net(), &gp, 2.0, &spec()).unwrap().value;
            let c = 1.0 - coverage_closed_form(&net(), &gp, 2.0).unwrap();
            assert!((q - c).abs() < 1e-9, "({mo},{mi}): {q} vs {c}");
        }
    }

    #[test]
    fn outage_is_power_invariant() {
        let gp = GammaParams::new(3, 2).unwrap();
        let a = outage(&net(), &gp, 1.5, &spec()).unwrap().value;
        let b = outage(&net().with_power(1e9), &gp, 1.5, &spec()).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn outage_monotone_in_diversity() {
        let mut last = 1.0;
        for mo in 1..=8 {
            let v = outage(&net(), &GammaParams::new(mo, 1).unwrap(), 3.0, &spec()).unwrap().value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn ergodic_rates_reference() {
        for (mo, mi, nats) in [(1, 1, 1.48899), (2, 1, 2.0464), (4, 2, 2.0636), (1, 2, 1.09667)] {
            let r = ergodic_rate(&net(), &GammaParams::new(mo, mi).unwrap(), &spec()).unwrap();
            assert!((r.value - nats).abs() < 1e-4, "({mo},{mi}): {}", r.value);
        }
    }

    #[test]
    fn asep_reference_values() {
        let q4 = qam(4).unwrap();
        let q16 = qam(16).unwrap();
        for (mo, mi, a4, a16) in [
            (1, 1, 0.26090, 0.57640),
            (2, 1, 0.15363, 0.45567),
            (4, 2, 0.13860, 0.44888),
            (1, 2, 0.34245, 0.66236),
        ] {
            let gp = GammaParams::new(mo, mi).unwrap();
            let v4 = asep(&net(), &gp, &q4, AsepMethod::Exact, &spec()).unwrap().value;
            let v16 = asep(&net(), &gp, &q16, AsepMethod::Exact, &spec()).unwrap().value;
            assert!((v4 - a4).abs() < 1e-4, "4-QAM ({mo},{mi}): {v4}");
            assert!((v16 - a16).abs() < 1e-4, "16-QAM ({mo},{mi}): {v16}");
        }
    }

    #[test]
    fn jensen_gap_is_weighted_variance() {
        // SISO gaps from the closed-form SIR distribution.
        for (m, gap) in [(4, 0.0204819553), (16, 0.0539367796)] {
            let md = qam(m).unwrap();
            let gp = GammaParams::new(1, 1).unwrap();
            let e = asep(&net(), &gp, &md, AsepMethod::Exact, &spec()).unwrap().value;
            let j = asep(&net(), &gp, &md, AsepMethod::Jensen, &spec()).unwrap().value;
            assert!((j - e - gap).abs() < 1e-7, "{m}-QAM: {}", j - e);
        }
        let m = qam(16).unwrap();
        for mo in 1..=4 {
            let gp = GammaParams::new(mo, 2).unwrap();
            let e = asep(&net(), &gp, &m, AsepMethod::Exact, &spec()).unwrap().value;
            let j = asep(&net(), &gp, &m, AsepMethod::Jensen, &spec()).unwrap().value;
            assert!(j >= e, "m_o={mo}: {e} vs {j}");
        }
        let r = asep(&net(), &GammaParams::new(6, 1).unwrap(), &m, AsepMethod::Auto, &spec()).unwrap();
        assert!(r.diagnostics.contains(&Diagnostic::JensenSubstituted { m_o: 6 }));
    }

    #[test]
    fn noise_raises_asep() {
        let m = qam(4).unwrap();
        let gp = GammaParams::new(2, 1).unwrap();
        let mut last = 0.0;
        for snr_db in [110.0, 90.0, 70.0] {
            let n = NetworkModel::new(1e-5, 1.0, 4.0, 1e-12 * powf(10.0, snr_db / 10.0), 1e-12).unwrap();
            let v = asep(&n, &gp, &m, AsepMethod::Exact, &spec()).unwrap().value;
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn single_slot_routes_agree() {
        for (mo, mi) in [(1, 1), (2, 1), (3, 2), (5, 4)] {
            let gp = GammaParams::new(mo, mi).unwrap();
            let a = 1.0 - outage(&net(), &gp, 1.0, &spec()).unwrap().value;
            let b = coverage_single_via_joint(&net(), &gp, 1.0, &spec()).unwrap().value;
            assert!((a - b).abs() < 1e-8, "({mo},{mi}): {a} vs {b}");
        }
    }

    #[test]
    fn retransmission_bounds() {
        let n = NetworkModel::new(1e-5, 0.7, 4.0, 1.0, 0.0).unwrap();
        let gp = GammaParams::new(2, 1).unwrap();
        let cfg = RetxConfig { slot1: gp, slot2: gp, theta: 2.0, net: n };
        let single = 1.0 - outage(&n, &gp, 2.0, &spec()).unwrap().value;
        let corr = coverage_retx(&cfg, RetxMode::Correlated, &spec()).unwrap().value;
        let ind = coverage_retx(&cfg, RetxMode::Independent, &spec()).unwrap().value;
        assert!(single < corr && corr < ind && ind <= 1.0, "{single} {corr} {ind}");
    }

    #[test]
    fn sm_asep_is_clamped_probability() {
        let s = MimoScheme::SmMimo { nt: 2, nr: 2 };
        let r = asep_sm(&net(), &s, &qam(64).unwrap(), &spec()).unwrap();
        assert!((0.0..=1.0).contains(&r.value));
        let a = apep_sm(&net(), &s, 2.0, &spec()).unwrap().value;
        let b = apep_sm(&net(), &s, 1.0, &spec()).unwrap().value;
        assert!(a < b && b < 0.5);
        assert!(apep_sm(&net(), &MimoScheme::Siso, 1.0, &spec()).is_err());
    }

    #[test]
    fn throughput_scales_bits() {
        assert_eq!(throughput(0.25, &qam(16).unwrap()).unwrap(), 3.0);
        assert!(throughput(1.5, &qam(4).unwrap()).is_err());
    }
}
