use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use sgmimo::core::schemes::qam;
use sgmimo::core::{MimoScheme, NetworkModel};
use sgmimo::sim::*;
use statrs::function::erf::erfc;

const LAMBDA: f64 = 1e-5;

fn net(p: f64) -> NetworkModel {
    NetworkModel::new(LAMBDA, p, 4.0, 1.0, 0.0).unwrap()
}

fn siso_outage(theta: f64) -> f64 {
    let s = theta.sqrt();
    1.0 - 1.0 / (1.0 + s * (std::f64::consts::FRAC_PI_2 - (1.0 / s).atan()))
}

#[test]
fn station_count_is_poisson() {
    let n = net(1.0);
    let r = truncation_radius(&n);
    let mean = LAMBDA * std::f64::consts::PI * r * r;
    let draws = 2000;
    let mut rng = chunk_rng(1, 0);
    let total: usize = (0..draws).map(|_| sample_deployment(&n, 1.0, &mut rng).unwrap().bs_positions.len()).sum();
    let sigma = (mean / draws as f64).sqrt();
    assert!((total as f64 / draws as f64 - mean).abs() < 3.0 * sigma);
}

#[test]
fn serving_distance_is_rayleigh() {
    let n = net(1.0);
    let draws = 100_000;
    let mut rng = chunk_rng(2, 0);
    let mut r: Vec<f64> = (0..draws).map(|_| sample_deployment(&n, 1.0, &mut rng).unwrap().r0).collect();
    r.sort_by(f64::total_cmp);
    let cdf = |x: f64| 1.0 - (-LAMBDA * std::f64::consts::PI * x * x).exp();
    let ks = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / draws as f64).abs().max(((i + 1) as f64 / draws as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "KS {ks}");
}

#[test]
fn same_seed_same_estimate_for_any_thread_count() {
    let n = net(1.0);
    let cfg = SimConfig::new(4000, 99);
    let thetas = [0.5, 1.0, 3.0];
    std::env::set_var("SG_MIMO_THREADS", "1");
    let one = outage_curve(&n, &MimoScheme::ZfRx { nt: 2, nr: 3 }, &thetas, &cfg).unwrap();
    std::env::set_var("SG_MIMO_THREADS", "4");
    let four = outage_curve(&n, &MimoScheme::ZfRx { nt: 2, nr: 3 }, &thetas, &cfg).unwrap();
    std::env::remove_var("SG_MIMO_THREADS");
    assert_eq!(one, four);
    let other = outage_curve(&n, &MimoScheme::ZfRx { nt: 2, nr: 3 }, &thetas, &SimConfig::new(4000, 100)).unwrap();
    assert_ne!(one, other);
}

fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
}

#[test]
fn equivalent_gain_moments() {
    let (m, v) = moments(&intended_gain_samples(&MimoScheme::Simo { nr: 3 }, 100_000, 3).unwrap());
    assert!((m - 3.0).abs() < 0.05 && (v - 3.0).abs() < 0.15, "{m} {v}");
    let (m, _) = moments(&intended_gain_samples(&MimoScheme::ZfRx { nt: 2, nr: 2 }, 100_000, 4).unwrap());
    assert!((m - 1.0).abs() < 0.03, "{m}");
    // Interferers of a 3-user SDMA cell carry three unit-power streams.
    let (m, _) = moments(&interferer_gain_samples(&MimoScheme::Sdma { nt: 5, k: 3 }, 20_000, 5).unwrap());
    assert!((m - 3.0).abs() < 0.08, "{m}");
}

#[test]
fn interference_limited_sir_ignores_power() {
    let a = net(0.7);
    let b = a.with_power(1234.5);
    for s in [MimoScheme::Siso, MimoScheme::Ostbc { nt: 2, nr: 2, ns: 2, t: 2 }, MimoScheme::Sdma { nt: 4, k: 2 }] {
        for seed in 0..20 {
            let ta = sample_trial(&a, &s, 1.0, &mut chunk_rng(seed, 0)).unwrap();
            let tb = sample_trial(&b, &s, 1.0, &mut chunk_rng(seed, 0)).unwrap();
            assert_eq!(ta.sinr(&a).to_bits(), tb.sinr(&b).to_bits());
        }
    }
}

#[test]
fn clean_links_always_decode() {
    let mut rng = chunk_rng(6, 0);
    for m in [4, 16, 64] {
        let c = Constellation::new(&qam(m).unwrap());
        for _ in 0..500 {
            let ch = ChannelDraw::sample(&MimoScheme::Simo { nr: 2 }, 0, &mut rng);
            let link = stream_link(&MimoScheme::Simo { nr: 2 }, &ch, 0).unwrap();
            assert!(detect_symbol(&link, 1e-9, &[], &c, 0.0, InterfererMode::TrueQam, &mut rng));
        }
    }
    let s = MimoScheme::SmMimo { nt: 2, nr: 2 };
    let c = Constellation::new(&qam(16).unwrap());
    let det = MlDetector::new(&s, &c).unwrap();
    for _ in 0..200 {
        let ch = ChannelDraw::sample(&s, 0, &mut rng);
        assert!(detect_ml(&ch, 1e-9, &[], &det, &c, 0.0, InterfererMode::Gaussian, &mut rng));
    }
}

#[test]
fn ml_hypothesis_space() {
    let s = MimoScheme::SmMimo { nt: 2, nr: 2 };
    for (m, count) in [(4, 16), (16, 256)] {
        let c = Constellation::new(&qam(m).unwrap());
        assert_eq!(MlDetector::new(&s, &c).unwrap().hypotheses(), count);
    }
    let c = Constellation::new(&qam(64).unwrap());
    assert!(MlDetector::new(&s, &c).is_err());
    assert!(MlDetector::new(&MimoScheme::Siso, &c).is_err());
}

#[test]
fn slicer_picks_nearest_point() {
    let c = Constellation::new(&qam(16).unwrap());
    let mut rng = chunk_rng(7, 0);
    for _ in 0..2000 {
        let z = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let best = (0..c.len()).min_by(|&a, &b| (z - c.points[a]).norm().total_cmp(&(z - c.points[b]).norm())).unwrap();
        assert_eq!(c.slice(z), best);
    }
}

#[test]
fn truncation_error_is_small() {
    // Coupled drops: a PPP on the enlarged disk restricted to the default
    // disk is a PPP on the default disk.
    let n = net(1.0);
    let r_max = truncation_radius(&n);
    let mut rng = chunk_rng(8, 0);
    let trials = 100_000;
    let mut flips = 0usize;
    for _ in 0..trials {
        let dep = sample_deployment(&n, 1.5, &mut rng).unwrap();
        let g0: f64 = Exp1.sample(&mut rng);
        let (mut near, mut all) = (0.0, 0.0);
        for (i, &(x, y)) in dep.bs_positions.iter().enumerate() {
            if i == dep.serving_index {
                continue;
            }
            let d2 = x * x + y * y;
            let g: f64 = Exp1.sample(&mut rng);
            let l = g / (d2 * d2);
            all += l;
            if d2 <= r_max * r_max {
                near += l;
            }
        }
        let s = g0 * dep.r0.powi(-4);
        if dep.r0 <= r_max && (s < near) != (s < all) {
            flips += 1;
        }
    }
    assert!((flips as f64 / trials as f64) < 0.002, "{flips}");
}

#[test]
fn two_slot_positive_correlation() {
    let n = net(1.0);
    let s = MimoScheme::ZfRx { nt: 2, nr: 3 };
    let r = two_slot_curve(&n, &s, &s, &[1e-12, 0.3, 1.0, 3.0], &SimConfig::new(20_000, 9)).unwrap();
    for (j, t) in r.iter().enumerate() {
        let sigma = t.both.std_err().max(1e-3);
        assert!(t.both.mean >= t.first.mean * t.second.mean - 3.0 * sigma, "{j}: {t:?}");
    }
    assert_eq!((r[0].first.mean, r[0].second.mean, r[0].both.mean), (1.0, 1.0, 1.0));
}

#[test]
fn sparse_network_is_noise_limited() {
    // Essentially no active interferers; SISO coverage is then
    // E[exp(-theta N0 r0^4 / P)] = int e^-v exp(-a v^2) dv with a = theta N0 / (P (pi lambda)^2).
    let a = 1.0;
    let pl = std::f64::consts::PI * LAMBDA;
    let n = NetworkModel::new(LAMBDA, 1e-9, 4.0, 1.0, a * pl * pl).unwrap();
    let expected = 0.5 * (std::f64::consts::PI / a).sqrt() * (0.25 / a).exp() * erfc(0.5 / a.sqrt());
    let t = two_slot_coverage(&n, &MimoScheme::Siso, &MimoScheme::Siso, 1.0, &SimConfig::new(20_000, 10)).unwrap();
    for c in [t.first, t.second] {
        assert!((c.mean - expected).abs() < 3.0 * c.std_err(), "{c:?} vs {expected}");
    }
}

#[test]
fn estimate_metric_siso() {
    let sc = Scenario {
        net: net(1.0),
        scheme: MimoScheme::Siso,
        metric: SimMetric::Outage { theta: 1.0 },
    };
    let e = estimate_metric(&sc, 20_000, 11).unwrap();
    assert!((e.mean - siso_outage(1.0)).abs() < 3.0 * e.std_err(), "{e:?}");
    assert_eq!(e, estimate_metric(&sc, 20_000, 11).unwrap());
    let rate = estimate_metric(&Scenario { metric: SimMetric::Rate, ..sc }, 20_000, 12).unwrap();
    assert!((rate.mean - 1.48899).abs() < 3.0 * rate.std_err(), "{rate:?}");
}

#[test]
fn rejects_bad_inputs() {
    let n = net(1.0);
    assert!(outage_curve(&n, &MimoScheme::Siso, &[1.0], &SimConfig::new(10, 0)).is_err());
    assert!(outage_curve(&n, &MimoScheme::ZfRx { nt: 3, nr: 2 }, &[1.0], &SimConfig::new(1000, 0)).is_err());
    let ostbc4 = MimoScheme::Ostbc { nt: 4, nr: 1, ns: 3, t: 4 };
    assert!(outage_curve(&n, &ostbc4, &[1.0], &SimConfig::new(1000, 0)).is_err());
}

#[test]
fn per_trial_dump_matches_curve() {
    let n = net(1.0);
    let cfg = SimConfig::new(2000, 13);
    let rows = outage_trials(&n, &MimoScheme::Siso, 1.0, 2000, &cfg).unwrap();
    let est = outage_curve(&n, &MimoScheme::Siso, &[1.0], &cfg).unwrap()[0];
    let out = rows.iter().filter(|r| !r.covered).count() as f64 / 2000.0;
    assert!((out - est.mean).abs() < 1e-12);
    assert!(rows.iter().enumerate().all(|(i, r)| r.trial == i && r.r0 > 0.0));
}
