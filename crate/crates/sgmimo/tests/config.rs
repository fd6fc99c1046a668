use sgmimo::config::{db_to_linear, dbm_to_watts, MetricKind, ScenarioConfig};
use sgmimo::core::{MimoScheme, RetxMode};
use sgmimo::report::{config_from_csv, provenance, Table};
use sgmimo::sim::InterfererMode;

const BASE: &str = "
network.lambda_b = 10 /km2
network.eta = 4
network.power = 30 dBm
network.n0 = -90 dBm
scheme.add = siso
metric.kinds = outage
";

fn with(extra: &str) -> sgmimo::Result<ScenarioConfig> {
    ScenarioConfig::parse(&format!("{BASE}{extra}\n"))
}

fn bundled(name: &str) -> ScenarioConfig {
    ScenarioConfig::read(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

#[test]
fn unit_conversions_are_exact_on_decades() {
    assert_eq!(dbm_to_watts(-90.0), 1e-12);
    assert_eq!(dbm_to_watts(30.0), 1.0);
    assert_eq!(db_to_linear(10.0), 10.0);
    assert_eq!(db_to_linear(-20.0), 0.01);
    assert!((db_to_linear(5.0) - 10f64.sqrt()).abs() < 1e-15);
    let c = with("").unwrap();
    assert_eq!(c.network.n0, 1e-12);
    assert_eq!(c.network.power, 1.0);
    assert_eq!(c.network.lambda_b, 1e-5);
    assert_eq!(c.network.p, 1.0);
    let w = with("").unwrap().network;
    let m = ScenarioConfig::parse(&BASE.replace("10 /km2", "0.00001 /m2").replace("30 dBm", "1 W")).unwrap().network;
    assert_eq!(w, m);
}

#[test]
fn grids_and_lists() {
    let c = with("metric.theta = -10:5:20 dB\nmetric.snr = 70, 75:5:85, 110 dB").unwrap();
    assert_eq!(c.metric.theta_db, vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]);
    assert_eq!(c.metric.snr_db, vec![70.0, 75.0, 80.0, 85.0, 110.0]);
    assert_eq!(c.thetas()[0], 0.1);
    let c = with("sim.interferers = gaussian, trueqam\nmetric.retx_slot1 = zfrx(nt=2,nr=3)\nmetric.retx_modes = independent").unwrap();
    assert_eq!(c.sim.interferers, vec![InterfererMode::Gaussian, InterfererMode::TrueQam]);
    let z = MimoScheme::ZfRx { nt: 2, nr: 3 };
    assert_eq!(c.metric.retx, Some((z, z)));
    assert_eq!(c.metric.retx_modes, vec![RetxMode::Independent]);
}

#[test]
fn rejects_malformed_input() {
    let bad = [
        "network.lambda = 3 /km2",
        "network.eta = 3",
        "scheme.ad = siso",
        "network.n0 = -90",
        "network.n0 = -90 dB",
        "metric.theta = 0:5",
        "metric.theta = 5",
        "metric.theta = 10:-1:0 dB",
        "scheme.add = simo(nt=2)",
        "scheme.add = zfrx(nt=3,nr=2)",
        "modulation.m = 8",
        "metric.kinds = outage, goodput",
        "sim.trials = 10",
        "sim.trials = -1",
        "output.precision = 30",
        "metric.kinds = retx",
        "metric.retx_slot2 = siso",
        "sim.interferers = laplace",
        "no equals sign",
    ];
    for b in bad {
        let text = if b.starts_with("metric.kinds") { BASE.replace("metric.kinds = outage\n", "") + b } else { format!("{BASE}{b}") };
        let e = ScenarioConfig::parse(&text);
        assert!(matches!(e, Err(sgmimo::Error::Config(_) | sgmimo::Error::Core(_))), "{b}: {e:?}");
    }
    for k in ["network.eta", "network.power", "network.n0", "network.lambda_b"] {
        let text: String = BASE.lines().filter(|l| !l.starts_with(k)).map(|l| format!("{l}\n")).collect();
        assert!(ScenarioConfig::parse(&text).is_err(), "{k}");
    }
}

#[test]
fn empty_metric_list_is_invalid() {
    let e = ScenarioConfig::parse(&BASE.replace("metric.kinds = outage", "metric.kinds ="));
    assert!(matches!(e, Err(sgmimo::Error::Config(_))));
    let e = ScenarioConfig::parse(&BASE.replace("metric.kinds = outage\n", ""));
    assert!(matches!(&e, Err(sgmimo::Error::Config(m)) if m.contains("no metrics")), "{e:?}");
}

#[test]
fn canonical_text_round_trips() {
    for name in ["asep_vs_snr.cfg", "rate_throughput.cfg"] {
        let c = bundled(name);
        let text = c.to_text();
        let back = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }
    let odd = with("metric.theta = -7.3, 1e-3, 0.1:0.1:0.3 dB\nnetwork.lambda_u = 17.7 /km2\nnetwork.p = 0.37").unwrap();
    assert_eq!(ScenarioConfig::parse(&odd.to_text()).unwrap(), odd);
}

#[test]
fn repeated_keys() {
    assert!(with("network.eta = 3").is_err());
    let c = with("scheme.add = simo(nr=3)\nscheme.add = sdma(nt=5,k=3)").unwrap();
    assert_eq!(c.schemes, vec![MimoScheme::Siso, MimoScheme::Simo { nr: 3 }, MimoScheme::Sdma { nt: 5, k: 3 }]);
}

#[test]
fn provenance_header_reparses() {
    let c = bundled("asep_vs_snr.cfg");
    let mut t = Table::new(&["x"]);
    t.push(vec![1.5.into()]);
    let csv = t.to_csv_string(Some(&provenance(&c)), 9).unwrap();
    assert_eq!(config_from_csv(&csv).unwrap(), c);
    assert!(!csv.contains('\r'));
}

#[test]
fn bundled_scenarios() {
    let f = bundled("asep_vs_snr.cfg");
    assert_eq!(f.schemes.len(), 4);
    assert_eq!(f.metric.kinds, vec![MetricKind::Asep]);
    assert_eq!(f.network.n0, 1e-12);
    let t = bundled("rate_throughput.cfg");
    assert_eq!(t.metric.kinds, vec![MetricKind::Rate, MetricKind::Throughput]);
    assert_eq!(t.network.n0, 0.0);
}
