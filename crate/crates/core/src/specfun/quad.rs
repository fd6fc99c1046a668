//! Globally adaptive Gauss-Kronrod (7/15) quadrature over finite and
//! half-infinite intervals, for scalar and vector-valued integrands.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    /// Tighter settings used by the acceptance runs.
    pub fn precise() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::InvalidParameter(alloc::format!(
                "quadrature tolerances must be positive and the budget at least 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Integration domain.
///
/// `UpperInfinite` maps `[start, inf)` onto `[0, 1)` through
/// `x = start + scale * t / (1 - t)`; `scale` should be the length over which
/// the integrand varies. With `start = scale = r0` this is `x = r0 / (1 - t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite { a: f64, b: f64 },
    UpperInfinite { start: f64, scale: f64 },
}

impl Domain {
    pub fn finite(a: f64, b: f64) -> Self {
        Domain::Finite { a, b }
    }

    pub fn upper_infinite(start: f64, scale: f64) -> Self {
        Domain::UpperInfinite { start, scale }
    }

    fn unit_interval(&self) -> (f64, f64) {
        match *self {
            Domain::Finite { a, b } => (a, b),
            Domain::UpperInfinite { .. } => (0.0, 1.0),
        }
    }

    /// Maps a node of the working interval to `(x, dx/dt)`.
    #[inline]
    fn map(&self, t: f64) -> (f64, f64) {
        match *self {
            Domain::Finite { .. } => (t, 1.0),
            Domain::UpperInfinite { start, scale } => {
                let s = 1.0 - t;
                (start + scale * t / s, scale / (s * s))
            }
        }
    }
}

/// Scalar integration result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
    /// `false` when the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
    pub evaluations: usize,
}

/// Vector-valued integration result; every component shares the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureVec {
    pub values: Vec<f64>,
    pub err_estimates: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = libm::pow(200.0 * scaled / res_asc, 1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 15-point Kronrod rule with embedded 7-point Gauss estimate on `[a, b]`.
fn kronrod<F>(f: &mut F, domain: &Domain, a: f64, b: f64, dim: usize, buf: &mut [Vec<f64>; 15]) -> Result<Segment>
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // buf[0] centre, buf[2j-1]/buf[2j] the pair at +-XGK[j-1]
    let mut eval = |t: f64, out: &mut Vec<f64>| -> Result<()> {
        let (x, jac) = domain.map(t);
        for v in out.iter_mut() {
            *v = 0.0;
        }
        // Nodes that round onto the point at infinity carry no mass.
        if !(x.is_finite() && jac.is_finite()) {
            return Ok(());
        }
        f(x, out);
        for v in out.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand(x));
            }
            *v *= jac;
        }
        Ok(())
    };
    eval(center, &mut buf[0])?;
    for j in 0..7 {
        let dx = half * XGK[j];
        eval(center - dx, &mut buf[2 * j + 1])?;
        eval(center + dx, &mut buf[2 * j + 2])?;
    }

    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for c in 0..dim {
        let fc = buf[0][c];
        let mut res_k = fc * WGK[7];
        let mut res_g = fc * WG[3];
        let mut res_abs = (fc * WGK[7]).abs();
        for j in 0..7 {
            let f1 = buf[2 * j + 1][c];
            let f2 = buf[2 * j + 2][c];
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((buf[2 * j + 1][c] - mean).abs() + (buf[2 * j + 2][c] - mean).abs());
        }
        let h = half.abs();
        values[c] = res_k * half;
        errors[c] = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    }
    Ok(Segment { a, b, values, errors })
}

/// Integrates a vector-valued function component-wise.
///
/// `f(x, out)` must write `dim` values into `out`. Convergence requires every
/// component to meet `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_vec<F>(mut f: F, dim: usize, domain: Domain, spec: &QuadratureSpec) -> Result<QuadratureVec>
where
    F: FnMut(f64, &mut [f64]),
{
    spec.validate()?;
    let (lo, hi) = domain.unit_interval();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("bad interval [{lo}, {hi}]")));
    }
    if let Domain::UpperInfinite { scale, .. } = domain {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("bad scale {scale}")));
        }
    }
    if lo == hi || dim == 0 {
        return Ok(QuadratureVec {
            values: vec![0.0; dim],
            err_estimates: vec![0.0; dim],
            converged: true,
            evaluations: 0,
        });
    }

    let mut buf: [Vec<f64>; 15] = core::array::from_fn(|_| vec![0.0; dim]);
    let mut segments = vec![kronrod(&mut f, &domain, lo, hi, dim, &mut buf)?];
    let mut evaluations = 15;
    let mut totals = segments[0].values.clone();
    let mut errs = segments[0].errors.clone();

    let tolerance = |totals: &[f64], c: usize| spec.abs_tol.max(spec.rel_tol * totals[c].abs());
    let done = |totals: &[f64], errs: &[f64]| (0..dim).all(|c| errs[c] <= tolerance(totals, c));

    let mut converged = done(&totals, &errs);
    while !converged && segments.len() < spec.max_subdivisions {
        // Bisect the segment contributing the largest tolerance-weighted error.
        let mut worst = None;
        let mut worst_score = 0.0;
        for (i, seg) in segments.iter().enumerate() {
            let width = seg.b - seg.a;
            let mid = 0.5 * (seg.a + seg.b);
            if width.abs() <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
                continue;
            }
            let score = (0..dim)
                .map(|c| seg.errors[c] / tolerance(&totals, c))
                .fold(0.0, f64::max);
            if score > worst_score {
                worst_score = score;
                worst = Some(i);
            }
        }
        let Some(i) = worst else { break };
        let seg = segments.swap_remove(i);
        let mid = 0.5 * (seg.a + seg.b);
        let left = kronrod(&mut f, &domain, seg.a, mid, dim, &mut buf)?;
        let right = kronrod(&mut f, &domain, mid, seg.b, dim, &mut buf)?;
        evaluations += 30;
        for c in 0..dim {
            totals[c] += left.values[c] + right.values[c] - seg.values[c];
            errs[c] += left.errors[c] + right.errors[c] - seg.errors[c];
        }
        segments.push(left);
        segments.push(right);
        converged = done(&totals, &errs);
    }

    // Re-sum to shed the drift of the running updates.
    let mut values = vec![0.0; dim];
    let mut err_estimates = vec![0.0; dim];
    for seg in &segments {
        for c in 0..dim {
            values[c] += seg.values[c];
            err_estimates[c] += seg.errors[c];
        }
    }
    Ok(QuadratureVec {
        values,
        err_estimates,
        converged,
        evaluations,
    })
}

/// Integrates `f` over `domain`.
///
/// A non-finite integrand value is a hard error; an exhausted subdivision
/// budget is reported through [`Quadrature::converged`].
pub fn integrate<F>(mut f: F, domain: Domain, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out| out[0] = f(x), 1, domain, spec)?;
    Ok(Quadrature {
        value: r.values[0],
        err_estimate: r.err_estimates[0],
        converged: r.converged,
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, sqrt, PI};

    #[test]
    fn exponential_tail() {
        let r = integrate(|x| exp(-x), Domain::upper_infinite(0.0, 1.0), &QuadratureSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn serving_distance_pdf_normalizes() {
        for lambda in [1e-6, 1e-5, 3e-4, 0.1, 5.0] {
            let scale = 1.0 / sqrt(PI * lambda);
            let r = integrate(
                |x| 2.0 * PI * lambda * x * exp(-PI * lambda * x * x),
                Domain::upper_infinite(0.0, scale),
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "lambda={lambda}: {r:?}");
        }
    }

    #[test]
    fn endpoint_singularity() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| 1.0 / sqrt(x), Domain::finite(0.0, 1.0), &spec).unwrap();
        assert!(r.converged);
        assert!((r.value - 2.0).abs() <= 2.0 * spec.rel_tol * 10.0, "{r:?}");
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { x }, Domain::finite(0.0, 1.0), &QuadratureSpec::default());
        assert!(matches!(r, Err(Error::NonFiniteIntegrand(_))));
    }

    #[test]
    fn exhausted_budget_is_soft() {
        let spec = QuadratureSpec {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_subdivisions: 3,
        };
        let r = integrate(|x| libm::sin(1.0 / x), Domain::finite(1e-3, 1.0), &spec).unwrap();
        assert!(!r.converged);
        assert!(r.value.is_finite());
    }

    #[test]
    fn vector_components_share_nodes() {
        let r = integrate_vec(
            |x, out| {
                out[0] = 1.0;
                out[1] = x;
                out[2] = x * x;
            },
            3,
            Domain::finite(0.0, 2.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.values[0] - 2.0).abs() < 1e-13);
        assert!((r.values[1] - 2.0).abs() < 1e-13);
        assert!((r.values[2] - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec {
            rel_tol: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(integrate(|x| x, Domain::finite(0.0, 1.0), &spec).is_err());
    }

    proptest::proptest! {
        #[test]
        fn linear_in_the_integrand(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, k in 0.2f64..4.0) {
            let spec = QuadratureSpec::default();
            let d = Domain::upper_infinite(0.0, 1.0);
            let f = |x: f64| exp(-k * x) * libm::cos(x);
            let g = |x: f64| x * exp(-x * x);
            let rf = integrate(f, d, &spec).unwrap();
            let rg = integrate(g, d, &spec).unwrap();
            let rh = integrate(|x| alpha * f(x) + beta * g(x), d, &spec).unwrap();
            let combined = alpha.abs() * rf.err_estimate + beta.abs() * rg.err_estimate + rh.err_estimate;
            let lhs = rh.value;
            let rhs = alpha * rf.value + beta * rg.value;
            proptest::prop_assert!((lhs - rhs).abs() <= combined.max(1e-13), "{lhs} vs {rhs} (err {combined})");
        }
    }
}
