//! Scenario files.
//!
//! One `section.key = value` assignment per line; `#` starts a comment.
//! Dimensioned values carry an explicit unit:
//!
//! ```text
//! network.lambda_b = 10 /km2
//! network.p = 1
//! network.eta = 4
//! network.power = 30 dBm
//! network.n0 = -90 dBm
//! scheme.add = simo(nr=3)
//! scheme.add = zfrx(nt=2,nr=5)
//! modulation.m = 4
//! metric.kinds = outage, asep
//! metric.theta = -10:5:20 dB
//! metric.snr = 70, 80, 90 dB
//! sim.trials = 100000
//! sim.seed = 7
//! output.dir = out
//! ```
//!
//! Units are converted to SI once, here. [`ScenarioConfig::to_text`] writes
//! the canonical form, which parses back to an identical config.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use sgmimo_core::schemes::qam;
use sgmimo_core::{AsepMethod, MimoScheme, Modulation, NetworkModel, RetxMode};

use crate::sim::InterfererMode;
use crate::{Error, Result};

/// Quantities a run can produce, one CSV each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricKind {
    Outage,
    Asep,
    Rate,
    Throughput,
    Retx,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [Self::Outage, Self::Asep, Self::Rate, Self::Throughput, Self::Retx];

    pub fn name(self) -> &'static str {
        match self {
            Self::Outage => "outage",
            Self::Asep => "asep",
            Self::Rate => "rate",
            Self::Throughput => "throughput",
            Self::Retx => "retx",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown metric '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSection {
    /// Base stations per square metre.
    pub lambda_b: f64,
    pub p: f64,
    pub eta: f64,
    /// Watts.
    pub power: f64,
    /// Watts.
    pub n0: f64,
    /// Users per square metre; recorded only, the analysis uses the typical
    /// user and the activity factor `p`.
    pub lambda_u: Option<f64>,
}

impl NetworkSection {
    pub fn model(&self) -> Result<NetworkModel> {
        Ok(NetworkModel::new(self.lambda_b, self.p, self.eta, self.power, self.n0)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSection {
    pub kinds: Vec<MetricKind>,
    /// SIR thresholds in dB.
    pub theta_db: Vec<f64>,
    /// `P / N0` sweep in dB for ASEP; empty means the network's own power.
    pub snr_db: Vec<f64>,
    pub asep_method: AsepMethod,
    /// First and second transmission of the retransmission metric.
    pub retx: Option<(MimoScheme, MimoScheme)>,
    pub retx_modes: Vec<RetxMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    /// Monte-Carlo drops per point; zero skips the simulator.
    pub trials: usize,
    pub seed: u64,
    pub interferers: Vec<InterfererMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Significant digits in CSV cells.
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub network: NetworkSection,
    pub schemes: Vec<MimoScheme>,
    pub modulation: u32,
    pub metric: MetricSection,
    pub sim: SimSection,
    pub output: OutputSection,
}

pub const DEFAULT_PRECISION: usize = 9;

/// `10^(db / 10)`, exact when `db` is a multiple of 10.
pub fn db_to_linear(db: f64) -> f64 {
    let k = db / 10.0;
    if k.fract() == 0.0 && k.abs() < 300.0 {
        format!("1e{}", k as i64).parse().expect("valid literal")
    } else {
        10f64.powf(k)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Shortest text that parses back to `x`.
fn exact(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s.trim()))
    }
}

/// Splits `value unit` at the last whitespace.
fn with_unit(s: &str) -> std::result::Result<(f64, &str), String> {
    let s = s.trim();
    let (v, u) = s.rsplit_once(char::is_whitespace).ok_or_else(|| format!("'{s}' needs a unit"))?;
    Ok((number(v)?, u.trim()))
}

fn intensity(s: &str) -> std::result::Result<f64, String> {
    match with_unit(s)? {
        (v, "/km2") => Ok(v / 1e6),
        (v, "/m2") => Ok(v),
        (_, u) => Err(format!("intensity unit must be /km2 or /m2, got '{u}'")),
    }
}

fn power(s: &str) -> std::result::Result<f64, String> {
    match with_unit(s)? {
        (v, "dBm") => Ok(dbm_to_watts(v)),
        (v, "W") => Ok(v),
        (_, u) => Err(format!("power unit must be dBm or W, got '{u}'")),
    }
}

/// Comma-separated values and `start:step:stop` ranges.
fn grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts[..] {
            [v] => out.push(number(v)?),
            [a, step, b] => {
                let (a, step, b) = (number(a)?, number(step)?, number(b)?);
                if step.is_nan() || step <= 0.0 || b < a {
                    return Err(format!("range '{item}' needs a positive step and start <= stop"));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                if n > 10_000 {
                    return Err(format!("range '{item}' has too many points"));
                }
                out.extend((0..=n).map(|i| a + i as f64 * step));
            }
            _ => return Err(format!("cannot read grid item '{item}'")),
        }
    }
    if out.is_empty() {
        return Err("empty grid".into());
    }
    Ok(out)
}

fn db_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    let body = s.strip_suffix("dB").ok_or_else(|| format!("'{s}' needs the unit dB"))?;
    grid(body)
}

fn list<T, F>(s: &str, f: F) -> std::result::Result<Vec<T>, String>
where
    F: Fn(&str) -> std::result::Result<T, String>,
{
    let v: Vec<T> = s.split(',').map(str::trim).filter(|i| !i.is_empty()).map(f).collect::<std::result::Result<_, _>>()?;
    if v.is_empty() {
        Err("empty list".into())
    } else {
        Ok(v)
    }
}

fn asep_method(s: &str) -> std::result::Result<AsepMethod, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "exact" => Ok(AsepMethod::Exact),
        "jensen" => Ok(AsepMethod::Jensen),
        "auto" => Ok(AsepMethod::Auto),
        _ => Err(format!("unknown ASEP method '{s}'")),
    }
}

fn asep_method_name(m: AsepMethod) -> &'static str {
    match m {
        AsepMethod::Exact => "exact",
        AsepMethod::Jensen => "jensen",
        AsepMethod::Auto => "auto",
    }
}

fn retx_mode(s: &str) -> std::result::Result<RetxMode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "correlated" => Ok(RetxMode::Correlated),
        "independent" => Ok(RetxMode::Independent),
        _ => Err(format!("unknown retransmission mode '{s}'")),
    }
}

pub fn retx_mode_name(m: RetxMode) -> &'static str {
    match m {
        RetxMode::Correlated => "correlated",
        RetxMode::Independent => "independent",
    }
}

fn scheme(s: &str) -> std::result::Result<MimoScheme, String> {
    s.parse().map_err(|e: sgmimo_core::Error| e.to_string())
}

fn unsigned<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim().parse().map_err(|_| format!("'{}' is not a non-negative integer", s.trim()))
}

const KEYS: [&str; 20] = [
    "network.lambda_b",
    "network.lambda_u",
    "network.p",
    "network.eta",
    "network.power",
    "network.n0",
    "scheme.add",
    "modulation.m",
    "metric.kinds",
    "metric.theta",
    "metric.snr",
    "metric.asep_method",
    "metric.retx_slot1",
    "metric.retx_slot2",
    "metric.retx_modes",
    "sim.trials",
    "sim.seed",
    "sim.interferers",
    "output.dir",
    "output.precision",
];

#[derive(Default)]
struct Draft {
    lambda_b: Option<f64>,
    lambda_u: Option<f64>,
    p: Option<f64>,
    eta: Option<f64>,
    power: Option<f64>,
    n0: Option<f64>,
    schemes: Vec<MimoScheme>,
    m: Option<u32>,
    kinds: Option<Vec<MetricKind>>,
    theta_db: Option<Vec<f64>>,
    snr_db: Option<Vec<f64>>,
    asep_method: Option<AsepMethod>,
    slot1: Option<MimoScheme>,
    slot2: Option<MimoScheme>,
    retx_modes: Option<Vec<RetxMode>>,
    trials: Option<usize>,
    seed: Option<u64>,
    interferers: Option<Vec<InterfererMode>>,
    dir: Option<PathBuf>,
    precision: Option<usize>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut d = Draft::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(line_no, "expected 'section.key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(line_no, format!("unknown key '{key}'")));
            }
            if key != "scheme.add" && !seen.insert(key.to_string()) {
                return Err(err(line_no, format!("duplicate key '{key}'")));
            }
            let e = |m: String| err(line_no, format!("{key}: {m}"));
            match key {
                "network.lambda_b" => d.lambda_b = Some(intensity(value).map_err(e)?),
                "network.lambda_u" => d.lambda_u = Some(intensity(value).map_err(e)?),
                "network.p" => d.p = Some(number(value).map_err(e)?),
                "network.eta" => d.eta = Some(number(value).map_err(e)?),
                "network.power" => d.power = Some(power(value).map_err(e)?),
                "network.n0" => d.n0 = Some(power(value).map_err(e)?),
                "scheme.add" => d.schemes.push(scheme(value).map_err(e)?),
                "modulation.m" => d.m = Some(unsigned(value).map_err(e)?),
                "metric.kinds" => d.kinds = Some(list(value, |s| s.parse::<MetricKind>().map_err(|e| e.to_string())).map_err(e)?),
                "metric.theta" => d.theta_db = Some(db_grid(value).map_err(e)?),
                "metric.snr" => d.snr_db = Some(db_grid(value).map_err(e)?),
                "metric.asep_method" => d.asep_method = Some(asep_method(value).map_err(e)?),
                "metric.retx_slot1" => d.slot1 = Some(scheme(value).map_err(e)?),
                "metric.retx_slot2" => d.slot2 = Some(scheme(value).map_err(e)?),
                "metric.retx_modes" => d.retx_modes = Some(list(value, retx_mode).map_err(e)?),
                "sim.trials" => d.trials = Some(unsigned(value).map_err(e)?),
                "sim.seed" => d.seed = Some(unsigned(value).map_err(e)?),
                "sim.interferers" => {
                    d.interferers = Some(list(value, |s| s.parse::<InterfererMode>().map_err(|e| e.to_string())).map_err(e)?)
                }
                "output.dir" => d.dir = Some(PathBuf::from(value)),
                "output.precision" => d.precision = Some(unsigned(value).map_err(e)?),
                _ => unreachable!("key table and match agree"),
            }
        }
        d.finish()
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn modulation(&self) -> Result<Modulation> {
        Ok(qam(self.modulation)?)
    }

    /// Linear SIR thresholds.
    pub fn thetas(&self) -> Vec<f64> {
        self.metric.theta_db.iter().map(|&t| db_to_linear(t)).collect()
    }

    /// Canonical text; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let n = &self.network;
        let join = |v: &[f64]| v.iter().map(|&x| exact(x)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "network.lambda_b = {} /m2", exact(n.lambda_b));
        if let Some(u) = n.lambda_u {
            let _ = writeln!(s, "network.lambda_u = {} /m2", exact(u));
        }
        let _ = writeln!(s, "network.p = {}", exact(n.p));
        let _ = writeln!(s, "network.eta = {}", exact(n.eta));
        let _ = writeln!(s, "network.power = {} W", exact(n.power));
        let _ = writeln!(s, "network.n0 = {} W", exact(n.n0));
        for sc in &self.schemes {
            let _ = writeln!(s, "scheme.add = {sc}");
        }
        let _ = writeln!(s, "modulation.m = {}", self.modulation);
        let m = &self.metric;
        let kinds: Vec<&str> = m.kinds.iter().map(|k| k.name()).collect();
        let _ = writeln!(s, "metric.kinds = {}", kinds.join(", "));
        let _ = writeln!(s, "metric.theta = {} dB", join(&m.theta_db));
        if !m.snr_db.is_empty() {
            let _ = writeln!(s, "metric.snr = {} dB", join(&m.snr_db));
        }
        let _ = writeln!(s, "metric.asep_method = {}", asep_method_name(m.asep_method));
        if let Some((a, b)) = m.retx {
            let _ = writeln!(s, "metric.retx_slot1 = {a}");
            let _ = writeln!(s, "metric.retx_slot2 = {b}");
        }
        let modes: Vec<&str> = m.retx_modes.iter().map(|&r| retx_mode_name(r)).collect();
        let _ = writeln!(s, "metric.retx_modes = {}", modes.join(", "));
        let _ = writeln!(s, "sim.trials = {}", self.sim.trials);
        let _ = writeln!(s, "sim.seed = {}", self.sim.seed);
        let modes: Vec<String> = self.sim.interferers.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(s, "sim.interferers = {}", modes.join(", "));
        let _ = writeln!(s, "output.dir = {}", self.output.dir.display());
        let _ = writeln!(s, "output.precision = {}", self.output.precision);
        s
    }
}

impl Draft {
    fn finish(self) -> Result<ScenarioConfig> {
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| Error::Config(format!("missing {k}")));
        let network = NetworkSection {
            lambda_b: need(self.lambda_b, "network.lambda_b")?,
            p: self.p.unwrap_or(1.0),
            eta: need(self.eta, "network.eta")?,
            power: need(self.power, "network.power")?,
            n0: need(self.n0, "network.n0")?,
            lambda_u: self.lambda_u,
        };
        network.model()?;
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme.add is required".into()));
        }
        let kinds = self.kinds.unwrap_or_default();
        if kinds.is_empty() {
            return Err(Error::Config("metric.kinds lists no metrics".into()));
        }
        let modulation = self.m.unwrap_or(4);
        qam(modulation)?;
        let retx = match (self.slot1, self.slot2) {
            (Some(a), b) => Some((a, b.unwrap_or(a))),
            (None, Some(_)) => return Err(Error::Config("metric.retx_slot2 needs metric.retx_slot1".into())),
            (None, None) => None,
        };
        if kinds.contains(&MetricKind::Retx) && retx.is_none() {
            return Err(Error::Config("the retx metric needs metric.retx_slot1".into()));
        }
        let precision = self.precision.unwrap_or(DEFAULT_PRECISION);
        if !(3..=17).contains(&precision) {
            return Err(Error::Config(format!("output.precision must lie in 3..=17, got {precision}")));
        }
        let trials = self.trials.unwrap_or(0);
        if trials > 0 && trials < crate::sim::MIN_TRIALS {
            return Err(Error::Config(format!("sim.trials must be 0 or at least {}", crate::sim::MIN_TRIALS)));
        }
        Ok(ScenarioConfig {
            network,
            schemes: self.schemes,
            modulation,
            metric: MetricSection {
                kinds,
                theta_db: self.theta_db.unwrap_or_else(|| vec![0.0]),
                snr_db: self.snr_db.unwrap_or_default(),
                asep_method: self.asep_method.unwrap_or(AsepMethod::Auto),
                retx,
                retx_modes: self.retx_modes.unwrap_or_else(|| vec![RetxMode::Correlated, RetxMode::Independent]),
            },
            sim: SimSection {
                trials,
                seed: self.seed.unwrap_or(1),
                interferers: self.interferers.unwrap_or_else(|| vec![InterfererMode::TrueQam]),
            },
            output: OutputSection {
                dir: self.dir.unwrap_or_else(|| PathBuf::from(".")),
                precision,
            },
        })
    }
}
