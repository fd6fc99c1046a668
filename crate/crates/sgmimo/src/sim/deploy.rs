use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use sgmimo_core::NetworkModel;

use crate::{Error, Result};

/// Expected base stations per drop above which the truncation radius is
/// capped (only reached for path-loss exponents close to 2).
pub const MAX_EXPECTED_BS: f64 = 20_000.0;

/// Share of the mean interference allowed to fall outside the disk.
pub const TAIL_FRACTION: f64 = 1e-3;

/// Radius of the simulated disk.
///
/// The mean interference received from a PPP beyond radius `R`, relative to
/// everything beyond the serving distance `r0`, is `(R / r0)^(2 - eta)`;
/// requiring this to be below [`TAIL_FRACTION`] at the mean serving distance
/// gives `R = E[r0] * 1000^(1 / (eta - 2))`. The radius is at least
/// `10 E[r0]` and at most the radius holding [`MAX_EXPECTED_BS`] points on
/// average.
pub fn truncation_radius(net: &NetworkModel) -> f64 {
    let mean_r0 = net.mean_serving_distance();
    let tail = mean_r0 * TAIL_FRACTION.powf(-1.0 / (net.eta - 2.0));
    let cap = (MAX_EXPECTED_BS / (std::f64::consts::PI * net.lambda_b)).sqrt();
    (10.0 * mean_r0).max(tail).min(cap)
}

/// One drop of base stations around the typical user at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    /// Positions in meters, the serving station included.
    pub bs_positions: Vec<(f64, f64)>,
    pub serving_index: usize,
    /// Distance to the nearest (serving) station.
    pub r0: f64,
    /// Activity of every station in the current slot; the serving station
    /// is always active.
    pub active_mask: Vec<bool>,
    pub r_max: f64,
}

impl Deployment {
    /// Distances to the active interfering stations.
    pub fn active_interferers(&self) -> impl Iterator<Item = f64> + '_ {
        self.bs_positions
            .iter()
            .zip(&self.active_mask)
            .enumerate()
            .filter(move |(i, (_, &on))| on && *i != self.serving_index)
            .map(|(_, ((x, y), _))| x.hypot(*y))
    }

    /// Path losses `r_i^-eta` of the active interfering stations.
    pub fn interferer_losses(&self, eta: f64) -> Vec<f64> {
        let e = -0.5 * eta;
        self.bs_positions
            .iter()
            .zip(&self.active_mask)
            .enumerate()
            .filter(|(i, (_, &on))| on && *i != self.serving_index)
            .map(|(_, ((x, y), _))| (x * x + y * y).powf(e))
            .collect()
    }

    /// Draws fresh activity for a new slot.
    pub fn redraw_activity<R: Rng>(&mut self, p: f64, rng: &mut R) {
        for (i, a) in self.active_mask.iter_mut().enumerate() {
            *a = i == self.serving_index || rng.random::<f64>() < p;
        }
    }
}

fn uniform_annulus<R: Rng>(inner: f64, outer: f64, rng: &mut R) -> (f64, f64) {
    let r = (inner * inner + rng.random::<f64>() * (outer * outer - inner * inner)).sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    (r * phi.cos(), r * phi.sin())
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Sim(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// A PPP drop in a disk of radius `truncation_radius(net) * radius_scale`,
/// conditioned on holding at least one station.
pub fn sample_deployment<R: Rng>(net: &NetworkModel, radius_scale: f64, rng: &mut R) -> Result<Deployment> {
    let r_max = truncation_radius(net) * radius_scale;
    let mean = net.lambda_b * std::f64::consts::PI * r_max * r_max;
    let n = loop {
        let n = poisson(mean, rng)?;
        if n > 0 {
            break n as usize;
        }
    };
    let bs_positions: Vec<(f64, f64)> = (0..n).map(|_| uniform_annulus(0.0, r_max, rng)).collect();
    let (serving_index, r0) = bs_positions
        .iter()
        .map(|(x, y)| x.hypot(*y))
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best });
    let mut dep = Deployment {
        bs_positions,
        serving_index,
        r0,
        active_mask: vec![true; n],
        r_max,
    };
    dep.redraw_activity(net.p, rng);
    Ok(dep)
}

/// A drop whose serving station sits at distance `r0`, with the other
/// stations forming a PPP on the annulus beyond it.
pub fn sample_deployment_given_r0<R: Rng>(net: &NetworkModel, r0: f64, rng: &mut R) -> Result<Deployment> {
    let r_max = truncation_radius(net).max(2.0 * r0);
    let mean = net.lambda_b * std::f64::consts::PI * (r_max * r_max - r0 * r0);
    let n = poisson(mean, rng)? as usize;
    let mut bs_positions = Vec::with_capacity(n + 1);
    bs_positions.push((r0, 0.0));
    bs_positions.extend((0..n).map(|_| uniform_annulus(r0, r_max, rng)));
    let mut dep = Deployment {
        active_mask: vec![true; bs_positions.len()],
        bs_positions,
        serving_index: 0,
        r0,
        r_max,
    };
    dep.redraw_activity(net.p, rng);
    Ok(dep)
}

/// Reproducible drop from a seed.
pub fn draw_deployment(net: &NetworkModel, seed: u64) -> Result<Deployment> {
    net.validate()?;
    sample_deployment(net, 1.0, &mut ChaCha8Rng::seed_from_u64(seed))
}
