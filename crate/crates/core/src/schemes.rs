//! MIMO configurations, their equivalent single-antenna gamma parameters and
//! the square-QAM constants.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math::sqrt;
use crate::{Error, Result};

/// Whether the gamma reduction of a scheme is exact or an approximation of
/// the interfering-link distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exactness {
    Exact,
    Approximate,
}

/// Scheme family without antenna counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeTag {
    Siso,
    Simo,
    Miso,
    Ostbc,
    ZfRx,
    Sdma,
    SmMimo,
}

impl SchemeTag {
    pub const ALL: [SchemeTag; 7] = [
        SchemeTag::Siso,
        SchemeTag::Simo,
        SchemeTag::Miso,
        SchemeTag::Ostbc,
        SchemeTag::ZfRx,
        SchemeTag::Sdma,
        SchemeTag::SmMimo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeTag::Siso => "siso",
            SchemeTag::Simo => "simo",
            SchemeTag::Miso => "miso",
            SchemeTag::Ostbc => "ostbc",
            SchemeTag::ZfRx => "zfrx",
            SchemeTag::Sdma => "sdma",
            SchemeTag::SmMimo => "smmimo",
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme '{s}'")))
    }
}

/// A MIMO transmission configuration.
///
/// `Ostbc` transmits `ns` symbols from `ns` of the `nt` antennas over `t`
/// channel uses; `Sdma` serves `k` single-antenna users with zero-forcing
/// precoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MimoScheme {
    Siso,
    Simo { nr: u32 },
    Miso { nt: u32 },
    Ostbc { nt: u32, nr: u32, ns: u32, t: u32 },
    ZfRx { nt: u32, nr: u32 },
    Sdma { nt: u32, k: u32 },
    SmMimo { nt: u32, nr: u32 },
}

/// Equivalent-SISO parameters: intended gain `Gamma(m_o, 1)`, per-interferer
/// gain `Gamma(m_i, 1)`, `streams` symbols multiplexed per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GammaParams {
    pub m_o: u32,
    pub m_i: u32,
    pub streams: u32,
    pub exactness: Exactness,
}

impl GammaParams {
    /// Parameters that are not tied to a concrete scheme (exact by convention).
    pub fn new(m_o: u32, m_i: u32) -> Result<Self> {
        if m_o == 0 || m_i == 0 {
            return Err(Error::InvalidParameter(format!("gamma shapes must be >= 1, got ({m_o}, {m_i})")));
        }
        Ok(Self {
            m_o,
            m_i,
            streams: m_i,
            exactness: Exactness::Exact,
        })
    }
}

fn violation(msg: alloc::string::String) -> Error {
    Error::InvariantViolation(msg)
}

impl MimoScheme {
    pub fn tag(&self) -> SchemeTag {
        match self {
            MimoScheme::Siso => SchemeTag::Siso,
            MimoScheme::Simo { .. } => SchemeTag::Simo,
            MimoScheme::Miso { .. } => SchemeTag::Miso,
            MimoScheme::Ostbc { .. } => SchemeTag::Ostbc,
            MimoScheme::ZfRx { .. } => SchemeTag::ZfRx,
            MimoScheme::Sdma { .. } => SchemeTag::Sdma,
            MimoScheme::SmMimo { .. } => SchemeTag::SmMimo,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts: Vec<u32> = match *self {
            MimoScheme::Siso => Vec::new(),
            MimoScheme::Simo { nr } => alloc::vec![nr],
            MimoScheme::Miso { nt } => alloc::vec![nt],
            MimoScheme::Ostbc { nt, nr, ns, t } => alloc::vec![nt, nr, ns, t],
            MimoScheme::ZfRx { nt, nr } => alloc::vec![nt, nr],
            MimoScheme::Sdma { nt, k } => alloc::vec![nt, k],
            MimoScheme::SmMimo { nt, nr } => alloc::vec![nt, nr],
        };
        if counts.contains(&0) {
            return Err(violation(format!("{self:?}: all counts must be >= 1")));
        }
        match *self {
            MimoScheme::Ostbc { nt, ns, t, .. } if ns > nt || t < ns => {
                Err(violation(format!("{self:?}: need ns <= nt and t >= ns")))
            }
            MimoScheme::ZfRx { nt, nr } if nr < nt => Err(violation(format!("{self:?}: zero-forcing needs nr >= nt"))),
            MimoScheme::Sdma { nt, k } if nt < k => Err(violation(format!("{self:?}: SDMA needs nt >= k"))),
            MimoScheme::SmMimo { nt, nr } if nr < nt => Err(violation(format!("{self:?}: SM-MIMO needs nr >= nt"))),
            _ => Ok(()),
        }
    }

    /// Gamma parameters of the equivalent single-antenna link.
    pub fn gamma_params(&self) -> Result<GammaParams> {
        self.validate()?;
        use Exactness::*;
        let (m_o, m_i, streams, exactness) = match *self {
            MimoScheme::Siso => (1, 1, 1, Exact),
            MimoScheme::Simo { nr } => (nr, 1, 1, Exact),
            MimoScheme::Miso { nt } => (nt, 1, 1, Exact),
            MimoScheme::Ostbc { nr, ns, .. } => (ns * nr, ns, ns, Exact),
            MimoScheme::ZfRx { nt, nr } => (nr - nt + 1, nt, nt, Exact),
            // K = 1 is single-user beamforming, which is exact.
            MimoScheme::Sdma { nt, k: 1 } => (nt, 1, 1, Exact),
            MimoScheme::Sdma { nt, k } => (nt - k + 1, k, k, Approximate),
            MimoScheme::SmMimo { nt, nr } => (nr, nt, nt, Approximate),
        };
        Ok(GammaParams {
            m_o,
            m_i,
            streams,
            exactness,
        })
    }

    /// `(transmit antennas per BS, receive antennas per user)`.
    pub fn antennas(&self) -> (u32, u32) {
        match *self {
            MimoScheme::Siso => (1, 1),
            MimoScheme::Simo { nr } => (1, nr),
            MimoScheme::Miso { nt } => (nt, 1),
            MimoScheme::Ostbc { nt, nr, .. } => (nt, nr),
            MimoScheme::ZfRx { nt, nr } => (nt, nr),
            MimoScheme::Sdma { nt, .. } => (nt, 1),
            MimoScheme::SmMimo { nt, nr } => (nt, nr),
        }
    }

    /// Symbols delivered per channel use: the stream count, divided by the
    /// block length for space-time codes.
    pub fn symbols_per_channel_use(&self) -> f64 {
        match *self {
            MimoScheme::Ostbc { ns, t, .. } => ns as f64 / t as f64,
            MimoScheme::Siso | MimoScheme::Simo { .. } | MimoScheme::Miso { .. } => 1.0,
            MimoScheme::ZfRx { nt, .. } | MimoScheme::SmMimo { nt, .. } => nt as f64,
            MimoScheme::Sdma { k, .. } => k as f64,
        }
    }
}

impl fmt::Display for MimoScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MimoScheme::Siso => write!(f, "siso"),
            MimoScheme::Simo { nr } => write!(f, "simo(nr={nr})"),
            MimoScheme::Miso { nt } => write!(f, "miso(nt={nt})"),
            MimoScheme::Ostbc { nt, nr, ns, t } => write!(f, "ostbc(nt={nt},nr={nr},ns={ns},t={t})"),
            MimoScheme::ZfRx { nt, nr } => write!(f, "zfrx(nt={nt},nr={nr})"),
            MimoScheme::Sdma { nt, k } => write!(f, "sdma(nt={nt},k={k})"),
            MimoScheme::SmMimo { nt, nr } => write!(f, "smmimo(nt={nt},nr={nr})"),
        }
    }
}

impl FromStr for MimoScheme {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `zfrx(nt=2,nr=5)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("scheme '{s}': {why}"));
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let rest = s[i + 1..].strip_suffix(')').ok_or_else(|| bad("missing ')'"))?;
                (&s[..i], rest)
            }
            None => (s, ""),
        };
        let tag: SchemeTag = name.parse()?;
        let mut fields: Vec<(&str, u32)> = Vec::new();
        for kv in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let k = k.trim();
            let v: u32 = v.trim().parse().map_err(|_| bad("counts must be non-negative integers"))?;
            if fields.iter().any(|(f, _)| *f == k) {
                return Err(bad("repeated field"));
            }
            fields.push((k, v));
        }
        let keys: &[&str] = match tag {
            SchemeTag::Siso => &[],
            SchemeTag::Simo => &["nr"],
            SchemeTag::Miso => &["nt"],
            SchemeTag::Ostbc => &["nt", "nr", "ns", "t"],
            SchemeTag::ZfRx | SchemeTag::SmMimo => &["nt", "nr"],
            SchemeTag::Sdma => &["nt", "k"],
        };
        if fields.len() != keys.len() || fields.iter().any(|(f, _)| !keys.contains(f)) {
            return Err(bad(&format!("expected fields {keys:?}")));
        }
        let get = |k: &str| fields.iter().find(|(f, _)| *f == k).map(|(_, v)| *v).unwrap_or(0);
        let scheme = match tag {
            SchemeTag::Siso => MimoScheme::Siso,
            SchemeTag::Simo => MimoScheme::Simo { nr: get("nr") },
            SchemeTag::Miso => MimoScheme::Miso { nt: get("nt") },
            SchemeTag::Ostbc => MimoScheme::Ostbc {
                nt: get("nt"),
                nr: get("nr"),
                ns: get("ns"),
                t: get("t"),
            },
            SchemeTag::ZfRx => MimoScheme::ZfRx { nt: get("nt"), nr: get("nr") },
            SchemeTag::Sdma => MimoScheme::Sdma { nt: get("nt"), k: get("k") },
            SchemeTag::SmMimo => MimoScheme::SmMimo { nt: get("nt"), nr: get("nr") },
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Square M-QAM with unit average symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub m: u32,
    pub w1: f64,
    pub w2: f64,
    pub beta: f64,
    /// Minimum Euclidean distance between constellation points.
    pub d_min: f64,
    /// Number of nearest neighbours at `d_min`, averaged over the points.
    pub n_dmin: f64,
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> f64 {
        libm::log2(self.m as f64)
    }

    pub fn side(&self) -> u32 {
        sqrt(self.m as f64) as u32
    }

    /// In-phase/quadrature level for index `i` of the `side` PAM levels.
    pub fn level(&self, i: u32) -> f64 {
        let side = self.side() as f64;
        (2.0 * i as f64 - (side - 1.0)) * self.d_min / 2.0
    }

    /// All constellation points as `(re, im)`, row-major over (I, Q) indices.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let side = self.side();
        (0..side)
            .flat_map(|i| (0..side).map(move |q| (i, q)))
            .map(|(i, q)| (self.level(i), self.level(q)))
            .collect()
    }
}

/// Constants for square `M`-QAM, `M` in {4, 16, 64, 256}.
pub fn qam(m: u32) -> Result<Modulation> {
    if !matches!(m, 4 | 16 | 64 | 256) {
        return Err(Error::InvalidModulation(m));
    }
    let mf = m as f64;
    let side = sqrt(mf);
    let r = (side - 1.0) / side;
    // Unit average energy: E = 2 (M - 1) / 3 * (d/2)^2 = 1.
    let d_min = sqrt(6.0 / (mf - 1.0));
    // Corner points have 2 neighbours, edge points 3, interior points 4.
    let s = side;
    let n_dmin = (4.0 * 2.0 + 4.0 * (s - 2.0) * 3.0 + (s - 2.0) * (s - 2.0) * 4.0) / mf;
    Ok(Modulation {
        m,
        w1: 2.0 * r,
        w2: -(r * r),
        beta: 3.0 / (2.0 * (mf - 1.0)),
        d_min,
        n_dmin,
    })
}

/// Extra transmit antennas per BS needed to keep `m_o / m_i = c` while
/// serving `k` users: `ceil(k (c + 1) - 1)`.
pub fn antenna_cost_for_extra_users(k: u32, c: f64) -> Result<u32> {
    if k == 0 || !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidParameter(format!("need k >= 1 and c > 0, got k={k}, c={c}")));
    }
    let v = k as f64 * (c + 1.0) - 1.0;
    // Absorb representation error so that exact integers do not round up.
    let r = libm::round(v);
    let n = if (v - r).abs() < 1e-9 * v.abs().max(1.0) { r } else { libm::ceil(v) };
    Ok(n as u32)
}
