use num_complex::Complex64;
use rand::Rng;
use sgmimo_core::{MimoScheme, Modulation};

use super::channel::{cn, ChannelDraw, StreamLink};
use crate::{Error, Result};

/// What the interfering stations transmit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfererMode {
    /// Uniform symbols of the same constellation.
    TrueQam,
    /// Unit-variance complex Gaussian symbols.
    Gaussian,
}

impl std::str::FromStr for InterfererMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trueqam" | "qam" => Ok(Self::TrueQam),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(Error::Config(format!("unknown interferer mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for InterfererMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TrueQam => "trueqam",
            Self::Gaussian => "gaussian",
        })
    }
}

/// Constellation with a nearest-point slicer.
#[derive(Debug, Clone)]
pub struct Constellation {
    pub points: Vec<Complex64>,
    levels: Vec<f64>,
    side: usize,
}

impl Constellation {
    pub fn new(m: &Modulation) -> Self {
        let side = m.side() as usize;
        let levels: Vec<f64> = (0..side as u32).map(|i| m.level(i)).collect();
        let points = m.points().into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        Self { points, levels, side }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn slice_level(&self, x: f64) -> usize {
        let d = self.levels[1] - self.levels[0];
        let i = ((x - self.levels[0]) / d).round();
        i.clamp(0.0, (self.side - 1) as f64) as usize
    }

    /// Index of the nearest point.
    pub fn slice(&self, z: Complex64) -> usize {
        self.slice_level(z.re) * self.side + self.slice_level(z.im)
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.points.len())
    }

    fn interferer_symbol<R: Rng>(&self, mode: InterfererMode, rng: &mut R) -> Complex64 {
        match mode {
            InterfererMode::TrueQam => self.points[self.random(rng)],
            InterfererMode::Gaussian => cn(rng),
        }
    }
}

/// Random draws shared by every SNR point of one trial, so that a sweep
/// over `P / N0` reuses the same symbols and noise shape.
#[derive(Debug, Clone)]
pub struct SymbolDraw {
    pub sent: usize,
    /// Interference at unit transmit power, path loss included.
    pub interference: Complex64,
    /// `CN(0, 1)` noise shape.
    pub noise: Complex64,
}

impl SymbolDraw {
    pub fn sample<R: Rng>(link: &StreamLink, losses: &[f64], c: &Constellation, mode: InterfererMode, rng: &mut R) -> Self {
        let sent = c.random(rng);
        let mut interference = Complex64::new(0.0, 0.0);
        for (i, l) in losses.iter().enumerate() {
            let amp = l.sqrt();
            for k in 0..link.per_interferer {
                interference += amp * link.coeffs[i * link.per_interferer + k] * c.interferer_symbol(mode, rng);
            }
        }
        Self {
            sent,
            interference,
            noise: cn(rng),
        }
    }

    /// Per-symbol ML decision on the combined scalar at `N0 / P =
    /// noise_to_power`; `true` when correct.
    pub fn correct(&self, link: &StreamLink, serving_loss: f64, c: &Constellation, noise_to_power: f64) -> bool {
        let gain = link.a * serving_loss.sqrt();
        let z = gain * c.points[self.sent] + self.interference + self.noise * noise_to_power.sqrt();
        c.slice(z / gain) == self.sent
    }
}

/// One per-symbol detection trial on `link`.
pub fn detect_symbol<R: Rng>(
    link: &StreamLink,
    serving_loss: f64,
    interferer_loss: &[f64],
    c: &Constellation,
    noise_to_power: f64,
    mode: InterfererMode,
    rng: &mut R,
) -> bool {
    SymbolDraw::sample(link, interferer_loss, c, mode, rng).correct(link, serving_loss, c, noise_to_power)
}

/// Largest joint hypothesis space searched by [`MlDetector`].
pub const MAX_ML_HYPOTHESES: usize = 256;

/// Exhaustive joint ML detection for spatial multiplexing.
#[derive(Debug, Clone)]
pub struct MlDetector {
    nt: usize,
    hypotheses: Vec<Vec<usize>>,
}

impl MlDetector {
    pub fn new(scheme: &MimoScheme, c: &Constellation) -> Result<Self> {
        let MimoScheme::SmMimo { nt, .. } = *scheme else {
            return Err(Error::Sim(format!("joint ML detection needs SM-MIMO, got {scheme}")));
        };
        let nt = nt as usize;
        let count = c.len().checked_pow(nt as u32).filter(|&n| n <= MAX_ML_HYPOTHESES);
        let count = count.ok_or_else(|| Error::Sim(format!("{}^{nt} hypotheses exceed {MAX_ML_HYPOTHESES}", c.len())))?;
        let hypotheses = (0..count)
            .map(|mut h| {
                (0..nt)
                    .map(|_| {
                        let s = h % c.len();
                        h /= c.len();
                        s
                    })
                    .collect()
            })
            .collect();
        Ok(Self { nt, hypotheses })
    }

    pub fn hypotheses(&self) -> usize {
        self.hypotheses.len()
    }
}

/// Draws shared by every SNR point of one SM-MIMO trial.
#[derive(Debug, Clone)]
pub struct VectorDraw {
    pub sent: Vec<usize>,
    pub interference: Vec<Complex64>,
    pub noise: Vec<Complex64>,
}

impl VectorDraw {
    pub fn sample<R: Rng>(ch: &ChannelDraw, losses: &[f64], det: &MlDetector, c: &Constellation, mode: InterfererMode, rng: &mut R) -> Self {
        let nr = ch.h_o.nrows();
        let sent: Vec<usize> = (0..det.nt).map(|_| c.random(rng)).collect();
        let mut interference = vec![Complex64::new(0.0, 0.0); nr];
        for (i, l) in losses.iter().enumerate() {
            let h = ch.h_i(i);
            let amp = l.sqrt();
            let x: Vec<Complex64> = (0..det.nt).map(|_| c.interferer_symbol(mode, rng)).collect();
            for (r, acc) in interference.iter_mut().enumerate() {
                *acc += amp * (0..det.nt).map(|k| h[(r, k)] * x[k]).sum::<Complex64>();
            }
        }
        let noise = (0..nr).map(|_| cn(rng)).collect();
        Self { sent, interference, noise }
    }

    /// Whether the joint ML estimate gets `stream` right.
    pub fn correct(&self, ch: &ChannelDraw, serving_loss: f64, det: &MlDetector, c: &Constellation, noise_to_power: f64, stream: usize) -> bool {
        let nr = ch.h_o.nrows();
        let g = serving_loss.sqrt();
        let sigma = noise_to_power.sqrt();
        let y: Vec<Complex64> = (0..nr)
            .map(|r| {
                let s: Complex64 = (0..det.nt).map(|k| ch.h_o[(r, k)] * c.points[self.sent[k]]).sum();
                g * s + self.interference[r] + sigma * self.noise[r]
            })
            .collect();
        let best = det
            .hypotheses
            .iter()
            .map(|h| {
                let d: f64 = (0..nr)
                    .map(|r| {
                        let s: Complex64 = (0..det.nt).map(|k| ch.h_o[(r, k)] * c.points[h[k]]).sum();
                        (y[r] - g * s).norm_sqr()
                    })
                    .sum();
                (d, h)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, h)| h[stream]);
        best == Some(self.sent[stream])
    }
}

/// One joint-ML detection trial; `true` when `stream` is decoded correctly.
#[allow(clippy::too_many_arguments)]
pub fn detect_ml<R: Rng>(
    ch: &ChannelDraw,
    serving_loss: f64,
    interferer_loss: &[f64],
    det: &MlDetector,
    c: &Constellation,
    noise_to_power: f64,
    mode: InterfererMode,
    rng: &mut R,
) -> bool {
    VectorDraw::sample(ch, interferer_loss, det, c, mode, rng).correct(ch, serving_loss, det, c, noise_to_power, 0)
}
