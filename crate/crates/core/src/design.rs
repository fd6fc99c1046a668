//! Inverting the analytic model: from a reliability target and a stream
//! count to concrete antenna configurations.
//!
//! The search follows the order constraint → diversity `m_o` for the requested
//! `m_i` → scheme realization → antenna count, and every answer is re-checked
//! against the metric it was selected for.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::interference::NetworkModel;
use crate::metrics::{asep, asep_sm, ergodic_rate, outage, per_cell_rate_bits, AsepMethod, Diagnostic};
use crate::schemes::{Exactness, GammaParams, MimoScheme, Modulation, SchemeTag};
use crate::specfun::QuadratureSpec;
use crate::{Error, Result};

/// Largest diversity order the scan will try.
pub const MAX_DIVERSITY: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// Per-stream ASEP must not exceed `eps`.
    MaxAsep { eps: f64, modulation: Modulation },
    /// Per-stream outage at linear SIR threshold `theta` must not exceed `eps`.
    MaxOutage { eps: f64, theta: f64 },
}

impl Constraint {
    pub fn eps(&self) -> f64 {
        match *self {
            Constraint::MaxAsep { eps, .. } | Constraint::MaxOutage { eps, .. } => eps,
        }
    }

    fn validate(&self) -> Result<()> {
        let eps = self.eps();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("constraint level must lie in (0, 1), got {eps}")));
        }
        if let Constraint::MaxOutage { theta, .. } = *self {
            if !(theta > 0.0 && theta.is_finite()) {
                return Err(Error::InvalidParameter(format!("SIR threshold must be positive, got {theta}")));
            }
        }
        Ok(())
    }
}

/// Optional caps on the antennas per BS and per user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AntennaBudget {
    pub max_nt: Option<u32>,
    pub max_nr: Option<u32>,
}

impl AntennaBudget {
    pub fn admits(&self, scheme: &MimoScheme) -> bool {
        let (nt, nr) = scheme.antennas();
        self.max_nt.is_none_or(|m| nt <= m) && self.max_nr.is_none_or(|m| nr <= m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignQuery {
    pub constraint: Constraint,
    /// `L` data streams, or `K` users for SDMA.
    pub required_streams: u32,
    pub net: NetworkModel,
    pub candidates: Vec<SchemeTag>,
    pub budget: AntennaBudget,
}

impl DesignQuery {
    pub fn validate(&self) -> Result<()> {
        self.constraint.validate()?;
        self.net.validate()?;
        if self.required_streams == 0 {
            return Err(Error::InvalidParameter("at least one stream is required".into()));
        }
        if self.candidates.is_empty() {
            return Err(Error::InvalidParameter("no candidate schemes".into()));
        }
        Ok(())
    }
}

/// One feasible configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOption {
    pub scheme: MimoScheme,
    pub gamma: GammaParams,
    /// Metric value re-evaluated for the realized scheme.
    pub achieved: f64,
    /// Ergodic rate per cell, bits per channel use.
    pub per_cell_rate: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl DesignOption {
    pub fn total_antennas(&self) -> u32 {
        let (nt, nr) = self.scheme.antennas();
        nt + nr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignAnswer {
    /// Feasible options, best first.
    pub options: Vec<DesignOption>,
    /// Candidates that could not meet the constraint, with the reason.
    pub rejected: Vec<(SchemeTag, Error)>,
}

/// The metric a constraint refers to, for the given gamma parameters.
/// SM-MIMO ASEP uses the joint-ML nearest-neighbour form.
fn evaluate(net: &NetworkModel, tag: SchemeTag, gp: &GammaParams, c: &Constraint, spec: &QuadratureSpec) -> Result<(f64, Vec<Diagnostic>)> {
    let r = match *c {
        Constraint::MaxOutage { theta, .. } => outage(net, gp, theta, spec)?,
        Constraint::MaxAsep { modulation, .. } if tag == SchemeTag::SmMimo => {
            let s = MimoScheme::SmMimo { nt: gp.m_i, nr: gp.m_o.max(gp.m_i) };
            asep_sm(net, &s, &modulation, spec)?
        }
        Constraint::MaxAsep { modulation, .. } => asep(net, gp, &modulation, AsepMethod::Auto, spec)?,
    };
    Ok((r.value, r.diagnostics))
}

fn scan(net: &NetworkModel, tag: SchemeTag, m_i: u32, c: &Constraint, spec: &QuadratureSpec) -> Result<u32> {
    c.validate()?;
    net.validate()?;
    let first = if tag == SchemeTag::SmMimo { m_i } else { 1 };
    for m_o in first..=MAX_DIVERSITY {
        let (v, _) = evaluate(net, tag, &GammaParams::new(m_o, m_i)?, c, spec)?;
        if v <= c.eps() {
            return Ok(m_o);
        }
    }
    Err(Error::Infeasible(MAX_DIVERSITY))
}

/// Smallest `m_o <= 64` meeting the constraint for `m_i` streams.
pub fn min_diversity(net: &NetworkModel, m_i: u32, constraint: &Constraint, spec: &QuadratureSpec) -> Result<u32> {
    if m_i == 0 {
        return Err(Error::InvalidParameter("m_i must be >= 1".into()));
    }
    scan(net, SchemeTag::Siso, m_i, constraint, spec)
}

/// Antenna counts that give the scheme the gamma parameters `(m_o, m_i)`.
///
/// OSTBC is realized with `Nt = Ns = T = m_i` and `Nr = m_o / m_i`.
pub fn realize_scheme(tag: SchemeTag, m_o: u32, m_i: u32) -> Result<MimoScheme> {
    let bad = || Error::Unrealizable {
        scheme: tag.name(),
        m_o,
        m_i,
    };
    if m_o == 0 || m_i == 0 {
        return Err(bad());
    }
    let s = match tag {
        SchemeTag::Siso if m_o == 1 && m_i == 1 => MimoScheme::Siso,
        SchemeTag::Simo if m_i == 1 => MimoScheme::Simo { nr: m_o },
        SchemeTag::Miso if m_i == 1 => MimoScheme::Miso { nt: m_o },
        SchemeTag::Ostbc if m_o.is_multiple_of(m_i) => MimoScheme::Ostbc {
            nt: m_i,
            nr: m_o / m_i,
            ns: m_i,
            t: m_i,
        },
        SchemeTag::ZfRx => MimoScheme::ZfRx { nt: m_i, nr: m_o + m_i - 1 },
        SchemeTag::Sdma => MimoScheme::Sdma { nt: m_o + m_i - 1, k: m_i },
        SchemeTag::SmMimo if m_o >= m_i => MimoScheme::SmMimo { nt: m_i, nr: m_o },
        _ => return Err(bad()),
    };
    debug_assert_eq!(s.gamma_params().map(|g| (g.m_o, g.m_i)), Ok((m_o, m_i)));
    Ok(s)
}

fn design_one(q: &DesignQuery, tag: SchemeTag, spec: &QuadratureSpec) -> Result<DesignOption> {
    let m_i = q.required_streams;
    // Reject structurally impossible tags before spending any evaluations.
    let probe_m_o = if tag == SchemeTag::SmMimo { m_i } else { m_i.max(1) };
    if let Err(e) = realize_scheme(tag, probe_m_o, m_i) {
        if !(tag == SchemeTag::Ostbc || tag == SchemeTag::Siso) {
            return Err(e);
        }
    }
    let m_o = scan(&q.net, tag, m_i, &q.constraint, spec)?;
    // Step up to the next realizable diversity order (OSTBC needs m_i | m_o).
    let mut chosen = None;
    for m in m_o..=MAX_DIVERSITY {
        if let Ok(s) = realize_scheme(tag, m, m_i) {
            chosen = Some(s);
            break;
        }
        if tag == SchemeTag::Siso {
            break;
        }
    }
    let scheme = chosen.ok_or(Error::Unrealizable {
        scheme: tag.name(),
        m_o,
        m_i,
    })?;
    if !q.budget.admits(&scheme) {
        let (nt, nr) = scheme.antennas();
        return Err(Error::InvalidParameter(format!("{scheme} needs Nt={nt}, Nr={nr}, beyond the antenna budget")));
    }
    let gamma = scheme.gamma_params()?;
    let (achieved, mut diagnostics) = evaluate(&q.net, tag, &gamma, &q.constraint, spec)?;
    if achieved > q.constraint.eps() {
        return Err(Error::InvariantViolation(format!("{scheme} re-evaluates to {achieved} above {}", q.constraint.eps())));
    }
    if gamma.exactness == Exactness::Approximate && !diagnostics.contains(&Diagnostic::ApproximateGammaMapping) {
        diagnostics.push(Diagnostic::ApproximateGammaMapping);
    }
    let rate = ergodic_rate(&q.net, &gamma, spec)?;
    Ok(DesignOption {
        scheme,
        gamma,
        achieved,
        per_cell_rate: per_cell_rate_bits(rate.value, &scheme),
        diagnostics,
    })
}

fn rank(a: &DesignOption, b: &DesignOption) -> Ordering {
    a.total_antennas()
        .cmp(&b.total_antennas())
        .then_with(|| b.per_cell_rate.partial_cmp(&a.per_cell_rate).unwrap_or(Ordering::Equal))
        .then_with(|| a.gamma.exactness.cmp(&b.gamma.exactness))
}

/// Minimal configuration per candidate scheme, ranked by total antennas,
/// then per-cell rate, then exact before approximate gamma mapping.
pub fn select(q: &DesignQuery, spec: &QuadratureSpec) -> Result<DesignAnswer> {
    q.validate()?;
    let mut options = Vec::new();
    let mut rejected = Vec::new();
    for &tag in &q.candidates {
        match design_one(q, tag, spec) {
            Ok(o) => options.push(o),
            Err(e) => rejected.push((tag, e)),
        }
    }
    if options.is_empty() {
        return Err(Error::AllInfeasible);
    }
    options.sort_by(rank);
    Ok(DesignAnswer { options, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::powf;
    use crate::schemes::qam;

    fn net() -> NetworkModel {
        NetworkModel::new(1e-5, 1.0, 4.0, 1.0, 0.0).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn theta5() -> f64 {
        powf(10.0, 0.5)
    }

    #[test]
    fn realize_examples() {
        assert_eq!(realize_scheme(SchemeTag::ZfRx, 4, 2).unwrap(), MimoScheme::ZfRx { nt: 2, nr: 5 });
        assert_eq!(
            realize_scheme(SchemeTag::Ostbc, 4, 2).unwrap(),
            MimoScheme::Ostbc { nt: 2, nr: 2, ns: 2, t: 2 }
        );
        assert!(matches!(realize_scheme(SchemeTag::Simo, 3, 2), Err(Error::Unrealizable { .. })));
        assert!(realize_scheme(SchemeTag::Ostbc, 3, 2).is_err());
        assert!(realize_scheme(SchemeTag::SmMimo, 1, 2).is_err());
    }

    #[test]
    fn round_trip_up_to_eight_antennas() {
        let mut schemes = alloc::vec![MimoScheme::Siso];
        for a in 1..=8 {
            schemes.push(MimoScheme::Simo { nr: a });
            schemes.push(MimoScheme::Miso { nt: a });
            for b in 1..=8 {
                schemes.push(MimoScheme::ZfRx { nt: a, nr: b });
                schemes.push(MimoScheme::Sdma { nt: a, k: b });
                schemes.push(MimoScheme::SmMimo { nt: a, nr: b });
                schemes.push(MimoScheme::Ostbc { nt: a, nr: b, ns: a, t: a });
            }
        }
        for s in schemes.into_iter().filter(|s| s.validate().is_ok()) {
            let g = s.gamma_params().unwrap();
            assert_eq!(realize_scheme(s.tag(), g.m_o, g.m_i).unwrap(), s);
        }
    }

    #[test]
    fn trivially_met_constraint() {
        let c = Constraint::MaxOutage { eps: 0.99, theta: 0.1 };
        assert_eq!(min_diversity(&net(), 1, &c, &spec()).unwrap(), 1);
    }

    #[test]
    fn fixed_point() {
        let gp = GammaParams::new(4, 2).unwrap();
        let eps = outage(&net(), &gp, theta5(), &spec()).unwrap().value;
        let c = Constraint::MaxOutage { eps, theta: theta5() };
        assert_eq!(min_diversity(&net(), 2, &c, &spec()).unwrap(), 4);
    }

    #[test]
    fn golden_outage_design() {
        let c = Constraint::MaxOutage { eps: 0.2, theta: theta5() };
        assert_eq!(min_diversity(&net(), 2, &c, &spec()).unwrap(), GOLDEN_M_O);
    }

    // outage(11, 2) = 0.2103, outage(12, 2) = 0.1871 at 5 dB.
    const GOLDEN_M_O: u32 = 12;

    #[test]
    fn loosening_never_raises_diversity() {
        let mut last = u32::MAX;
        for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let c = Constraint::MaxOutage { eps, theta: theta5() };
            let m = min_diversity(&net(), 2, &c, &spec()).unwrap();
            assert!(m <= last);
            last = m;
        }
    }

    #[test]
    fn infeasible_within_bound() {
        let c = Constraint::MaxOutage { eps: 1e-12, theta: 1e3 };
        assert_eq!(min_diversity(&net(), 8, &c, &spec()), Err(Error::Infeasible(MAX_DIVERSITY)));
    }

    #[test]
    fn zf_round_trip_through_select() {
        let gp = MimoScheme::ZfRx { nt: 2, nr: 5 }.gamma_params().unwrap();
        let eps = outage(&net(), &gp, theta5(), &spec()).unwrap().value;
        let q = DesignQuery {
            constraint: Constraint::MaxOutage { eps, theta: theta5() },
            required_streams: 2,
            net: net(),
            candidates: SchemeTag::ALL.to_vec(),
            budget: AntennaBudget::default(),
        };
        let a = select(&q, &spec()).unwrap();
        let zf = a.options.iter().find(|o| o.scheme.tag() == SchemeTag::ZfRx).unwrap();
        assert_eq!(zf.scheme, MimoScheme::ZfRx { nt: 2, nr: 5 });
        for o in &a.options {
            assert!(o.achieved <= eps);
        }
        for w in a.options.windows(2) {
            assert!(w[0].total_antennas() <= w[1].total_antennas());
        }
    }

    #[test]
    fn budget_leaves_only_ostbc() {
        // Alamouti 2x2 at 5 dB; ZF, SDMA and SM need more antennas for the
        // same diversity at two streams.
        let gp = MimoScheme::Ostbc { nt: 2, nr: 2, ns: 2, t: 2 }.gamma_params().unwrap();
        let eps = outage(&net(), &gp, theta5(), &spec()).unwrap().value;
        let q = DesignQuery {
            constraint: Constraint::MaxOutage { eps, theta: theta5() },
            required_streams: 2,
            net: net(),
            candidates: SchemeTag::ALL.to_vec(),
            budget: AntennaBudget { max_nt: Some(2), max_nr: Some(2) },
        };
        let a = select(&q, &spec()).unwrap();
        assert_eq!(a.options.len(), 1);
        assert_eq!(a.options[0].scheme, MimoScheme::Ostbc { nt: 2, nr: 2, ns: 2, t: 2 });
    }

    #[test]
    fn single_stream_loose_asep() {
        let m = qam(4).unwrap();
        let q = DesignQuery {
            constraint: Constraint::MaxAsep { eps: 0.75, modulation: m },
            required_streams: 1,
            net: net(),
            candidates: alloc::vec![SchemeTag::Siso, SchemeTag::Simo, SchemeTag::Miso],
            budget: AntennaBudget::default(),
        };
        let a = select(&q, &spec()).unwrap();
        assert!(a.options.iter().all(|o| o.gamma.m_o == 1));
        assert_eq!(a.options.len(), 3);
    }

    #[test]
    fn all_infeasible() {
        let q = DesignQuery {
            constraint: Constraint::MaxOutage { eps: 0.2, theta: 1.0 },
            required_streams: 3,
            net: net(),
            candidates: alloc::vec![SchemeTag::Simo, SchemeTag::Miso, SchemeTag::Siso],
            budget: AntennaBudget::default(),
        };
        assert_eq!(select(&q, &spec()), Err(Error::AllInfeasible));
    }
}
