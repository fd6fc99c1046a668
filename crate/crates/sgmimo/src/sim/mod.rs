//! Monte-Carlo simulation of the physical network: PPP drops, Rayleigh
//! MIMO channels, the schemes' precoders and combiners, and symbol
//! detection.
//!
//! Trials run in fixed chunks of [`CHUNK`] drops. Chunk `c` draws from a
//! ChaCha8 generator seeded with the run seed on stream `c`, and chunk
//! results are merged in chunk order, so estimates are bit-identical for any
//! thread count.

mod channel;
mod deploy;
mod detect;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgmimo_core::{MimoScheme, Modulation, NetworkModel};

pub use channel::{cn, cn_matrix, stream_link, zf_precoder, CMatrix, ChannelDraw, StreamLink};
pub use deploy::{
    draw_deployment, sample_deployment, sample_deployment_given_r0, truncation_radius, Deployment, MAX_EXPECTED_BS, TAIL_FRACTION,
};
pub use detect::{detect_ml, detect_symbol, Constellation, InterfererMode, MlDetector, SymbolDraw, VectorDraw, MAX_ML_HYPOTHESES};

use crate::{Error, Result};

/// Trials per RNG stream.
pub const CHUNK: usize = 1000;

/// Smallest trial count accepted by the estimators.
pub const MIN_TRIALS: usize = 1000;

/// Sample mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_samples: usize,
}

impl SimEstimate {
    pub fn std_err(&self) -> f64 {
        self.half_width_95 / 1.96
    }
}

/// Trial count, seed and the truncation-radius multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
    pub radius_scale: f64,
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            radius_scale: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Sim(format!("at least {MIN_TRIALS} trials are needed, got {}", self.trials)));
        }
        if !(self.radius_scale >= 1.0 && self.radius_scale.is_finite()) {
            return Err(Error::Sim(format!("radius scale must be >= 1, got {}", self.radius_scale)));
        }
        Ok(())
    }
}

/// Worker count: `SG_MIMO_THREADS` if set, else the available parallelism.
pub fn worker_threads() -> usize {
    std::env::var("SG_MIMO_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone)]
struct Moments {
    n: usize,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        for (j, v) in x.iter().enumerate() {
            self.sum[j] += v;
            self.sumsq[j] += v * v;
        }
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        for j in 0..self.sum.len() {
            self.sum[j] += o.sum[j];
            self.sumsq[j] += o.sumsq[j];
        }
    }

    fn estimates(&self) -> Vec<SimEstimate> {
        let n = self.n as f64;
        (0..self.sum.len())
            .map(|j| {
                let mean = self.sum[j] / n;
                let var = ((self.sumsq[j] - n * mean * mean) / (n - 1.0)).max(0.0);
                SimEstimate {
                    mean,
                    half_width_95: 1.96 * (var / n).sqrt(),
                    n_samples: self.n,
                }
            })
            .collect()
    }
}

/// Generator for chunk `chunk` of a run.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `trials` independent evaluations of `f`, each filling `dim` outputs,
/// and returns their sample means.
fn run<F>(cfg: &SimConfig, dim: usize, f: F) -> Result<Vec<SimEstimate>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    cfg.validate()?;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Moments>>>> = Mutex::new((0..chunks).map(|_| None).collect());
    let work = || loop {
        let c = next.fetch_add(1, Ordering::Relaxed);
        if c >= chunks {
            break;
        }
        let mut rng = chunk_rng(cfg.seed, c);
        let len = CHUNK.min(cfg.trials - c * CHUNK);
        let mut m = Moments::new(dim);
        let mut out = vec![0.0; dim];
        let r = (|| {
            for _ in 0..len {
                out.iter_mut().for_each(|v| *v = 0.0);
                f(&mut rng, &mut out)?;
                m.push(&out);
            }
            Ok(m)
        })();
        results.lock().expect("worker panicked")[c] = Some(r);
    };
    let threads = worker_threads().min(chunks);
    if threads <= 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }
    let mut total = Moments::new(dim);
    for r in results.into_inner().expect("worker panicked") {
        total.merge(&r.expect("every chunk runs")?);
    }
    Ok(total.estimates())
}

/// One drop of one slot: geometry, channels and the observed stream's
/// scalar model.
#[derive(Debug, Clone)]
pub struct Trial {
    pub dep: Deployment,
    pub ch: ChannelDraw,
    pub link: StreamLink,
    /// `r0^-eta`.
    pub serving_loss: f64,
    /// `r_i^-eta` of the active interferers.
    pub losses: Vec<f64>,
}

impl Trial {
    /// SINR with the network's `N0 / P`.
    pub fn sinr(&self, net: &NetworkModel) -> f64 {
        self.link.sinr(self.serving_loss, &self.losses, net.n0 / net.power)
    }

    /// Aggregate interference power `sum_i P r_i^-eta g_i`.
    pub fn interference(&self, net: &NetworkModel) -> f64 {
        self.losses.iter().enumerate().map(|(i, l)| net.power * l * self.link.interferer_gain(i)).sum()
    }
}

/// Fresh channels over an existing drop (a new slot), observing stream 0.
pub fn trial_on<R: Rng>(net: &NetworkModel, scheme: &MimoScheme, dep: Deployment, rng: &mut R) -> Result<Trial> {
    let losses = dep.interferer_losses(net.eta);
    // Singular draws have probability zero; redraw if one occurs.
    for _ in 0..16 {
        let ch = ChannelDraw::sample(scheme, losses.len(), rng);
        match stream_link(scheme, &ch, 0) {
            Ok(link) => {
                return Ok(Trial {
                    serving_loss: dep.r0.powf(-net.eta),
                    dep,
                    ch,
                    link,
                    losses,
                })
            }
            Err(Error::Sim(m)) if m.contains("singular") => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Sim("channel draws kept coming out singular".into()))
}

/// A fresh drop with fresh channels.
pub fn sample_trial<R: Rng>(net: &NetworkModel, scheme: &MimoScheme, radius_scale: f64, rng: &mut R) -> Result<Trial> {
    let dep = sample_deployment(net, radius_scale, rng)?;
    trial_on(net, scheme, dep, rng)
}

fn check(net: &NetworkModel, scheme: &MimoScheme) -> Result<()> {
    net.validate()?;
    scheme.gamma_params()?;
    Ok(())
}

/// `P(SINR < theta)` for every threshold, from shared drops.
pub fn outage_curve(net: &NetworkModel, scheme: &MimoScheme, thetas: &[f64], cfg: &SimConfig) -> Result<Vec<SimEstimate>> {
    check(net, scheme)?;
    run(cfg, thetas.len(), |rng, out| {
        let s = sample_trial(net, scheme, cfg.radius_scale, rng)?.sinr(net);
        for (o, t) in out.iter_mut().zip(thetas) {
            *o = if s < *t { 1.0 } else { 0.0 };
        }
        Ok(())
    })
}

/// Per-stream ergodic rate `E[ln(1 + SINR)]` in nats.
pub fn rate_estimate(net: &NetworkModel, scheme: &MimoScheme, cfg: &SimConfig) -> Result<SimEstimate> {
    check(net, scheme)?;
    let r = run(cfg, 1, |rng, out| {
        out[0] = sample_trial(net, scheme, cfg.radius_scale, rng)?.sinr(net).ln_1p();
        Ok(())
    })?;
    Ok(r[0])
}

/// Symbol error rate for each interferer mode (outer) and each `N0 / P`
/// (inner). Every SNR point of a trial reuses the same drop, symbols and
/// noise shape.
pub fn asep_curve(
    net: &NetworkModel,
    scheme: &MimoScheme,
    modulation: &Modulation,
    noise_to_power: &[f64],
    modes: &[InterfererMode],
    cfg: &SimConfig,
) -> Result<Vec<Vec<SimEstimate>>> {
    check(net, scheme)?;
    let c = Constellation::new(modulation);
    let ml = match scheme {
        MimoScheme::SmMimo { .. } => Some(MlDetector::new(scheme, &c)?),
        _ => None,
    };
    let k = noise_to_power.len();
    let flat = run(cfg, k * modes.len(), |rng, out| {
        let t = sample_trial(net, scheme, cfg.radius_scale, rng)?;
        for (mi, &mode) in modes.iter().enumerate() {
            match &ml {
                Some(det) => {
                    let d = VectorDraw::sample(&t.ch, &t.losses, det, &c, mode, rng);
                    for (j, &n) in noise_to_power.iter().enumerate() {
                        out[mi * k + j] = if d.correct(&t.ch, t.serving_loss, det, &c, n, 0) { 0.0 } else { 1.0 };
                    }
                }
                None => {
                    let d = SymbolDraw::sample(&t.link, &t.losses, &c, mode, rng);
                    for (j, &n) in noise_to_power.iter().enumerate() {
                        out[mi * k + j] = if d.correct(&t.link, t.serving_loss, &c, n) { 0.0 } else { 1.0 };
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(flat.chunks(k.max(1)).map(|c| c.to_vec()).collect())
}

/// Coverage estimates of two transmissions over the same drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSlot {
    pub first: SimEstimate,
    pub second: SimEstimate,
    pub both: SimEstimate,
    /// Success in at least one slot.
    pub either: SimEstimate,
}

/// Two-slot coverage for each threshold: the station locations are shared,
/// fading and activity are redrawn for the second slot.
pub fn two_slot_curve(net: &NetworkModel, first: &MimoScheme, second: &MimoScheme, thetas: &[f64], cfg: &SimConfig) -> Result<Vec<TwoSlot>> {
    check(net, first)?;
    check(net, second)?;
    let k = thetas.len();
    let flat = run(cfg, 4 * k, |rng, out| {
        let t1 = sample_trial(net, first, cfg.radius_scale, rng)?;
        let s1 = t1.sinr(net);
        let mut dep = t1.dep;
        dep.redraw_activity(net.p, rng);
        let s2 = trial_on(net, second, dep, rng)?.sinr(net);
        for (j, &t) in thetas.iter().enumerate() {
            let (a, b) = (s1 > t, s2 > t);
            out[j] = a as u8 as f64;
            out[k + j] = b as u8 as f64;
            out[2 * k + j] = (a && b) as u8 as f64;
            out[3 * k + j] = (a || b) as u8 as f64;
        }
        Ok(())
    })?;
    Ok((0..k)
        .map(|j| TwoSlot {
            first: flat[j],
            second: flat[k + j],
            both: flat[2 * k + j],
            either: flat[3 * k + j],
        })
        .collect())
}

/// [`two_slot_curve`] at a single threshold.
pub fn two_slot_coverage(net: &NetworkModel, first: &MimoScheme, second: &MimoScheme, theta: f64, cfg: &SimConfig) -> Result<TwoSlot> {
    Ok(two_slot_curve(net, first, second, &[theta], cfg)?[0])
}

/// Intended power gains `|a|^2` of stream 0 over independent channel draws.
pub fn intended_gain_samples(scheme: &MimoScheme, n: usize, seed: u64) -> Result<Vec<f64>> {
    scheme.gamma_params()?;
    let mut out = Vec::with_capacity(n);
    for c in 0..n.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in 0..CHUNK.min(n - c * CHUNK) {
            loop {
                let ch = ChannelDraw::sample(scheme, 0, &mut rng);
                match stream_link(scheme, &ch, 0) {
                    Ok(l) => {
                        out.push(l.gain());
                        break;
                    }
                    Err(Error::Sim(m)) if m.contains("singular") => continue,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}

/// Power gains of single interferers of the scheme, `sum_k |c_k|^2`.
pub fn interferer_gain_samples(scheme: &MimoScheme, n: usize, seed: u64) -> Result<Vec<f64>> {
    scheme.gamma_params()?;
    let mut out = Vec::with_capacity(n);
    for c in 0..n.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in 0..CHUNK.min(n - c * CHUNK) {
            let ch = ChannelDraw::sample(scheme, 1, &mut rng);
            out.push(stream_link(scheme, &ch, 0)?.interferer_gain(0));
        }
    }
    Ok(out)
}

/// `E[exp(-z I) | r0]` for each `z`, with the serving station pinned at `r0`.
pub fn interference_lt(net: &NetworkModel, scheme: &MimoScheme, r0: f64, zs: &[f64], cfg: &SimConfig) -> Result<Vec<SimEstimate>> {
    check(net, scheme)?;
    run(cfg, zs.len(), |rng, out| {
        let dep = sample_deployment_given_r0(net, r0, rng)?;
        let i = trial_on(net, scheme, dep, rng)?.interference(net);
        for (o, z) in out.iter_mut().zip(zs) {
            *o = (-z * i).exp();
        }
        Ok(())
    })
}

/// Quantity estimated by [`estimate_metric`].
#[derive(Debug, Clone, PartialEq)]
pub enum SimMetric {
    Outage { theta: f64 },
    Asep { modulation: Modulation, mode: InterfererMode },
    /// Nats per stream.
    Rate,
    /// Success in at least one of two slots.
    JointCoverage { second: MimoScheme, theta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub net: NetworkModel,
    pub scheme: MimoScheme,
    pub metric: SimMetric,
}

/// Single-number estimate of a scenario.
pub fn estimate_metric(sc: &Scenario, n_trials: usize, seed: u64) -> Result<SimEstimate> {
    let cfg = SimConfig::new(n_trials, seed);
    match &sc.metric {
        SimMetric::Outage { theta } => Ok(outage_curve(&sc.net, &sc.scheme, &[*theta], &cfg)?[0]),
        SimMetric::Rate => rate_estimate(&sc.net, &sc.scheme, &cfg),
        SimMetric::Asep { modulation, mode } => {
            Ok(asep_curve(&sc.net, &sc.scheme, modulation, &[sc.net.n0 / sc.net.power], &[*mode], &cfg)?[0][0])
        }
        SimMetric::JointCoverage { second, theta } => Ok(two_slot_coverage(&sc.net, &sc.scheme, second, *theta, &cfg)?.either),
    }
}

/// One row of a per-trial dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub r0: f64,
    pub sir_db: f64,
    /// SINR above the threshold.
    pub covered: bool,
}

/// Per-trial serving distance and SINR for the first `n` trials of the same
/// streams [`outage_curve`] uses.
pub fn outage_trials(net: &NetworkModel, scheme: &MimoScheme, theta: f64, n: usize, cfg: &SimConfig) -> Result<Vec<TrialRecord>> {
    check(net, scheme)?;
    let mut out = Vec::with_capacity(n);
    for c in 0..n.div_ceil(CHUNK) {
        let mut rng = chunk_rng(cfg.seed, c);
        for j in 0..CHUNK.min(n - c * CHUNK) {
            let t = sample_trial(net, scheme, cfg.radius_scale, &mut rng)?;
            let s = t.sinr(net);
            out.push(TrialRecord {
                trial: c * CHUNK + j,
                r0: t.dep.r0,
                sir_db: 10.0 * s.log10(),
                covered: s >= theta,
            });
        }
    }
    Ok(out)
}
