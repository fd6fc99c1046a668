//! Command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sgmimo_core::design::select;
use sgmimo_core::interference::{joint_lt_interference, lt_interference};
use sgmimo_core::metrics::{asep, asep_sm, coverage_closed_form, coverage_retx, ergodic_rate, outage, per_cell_rate_bits, throughput};
use sgmimo_core::schemes::qam;
use sgmimo_core::{
    AntennaBudget, AsepMethod, Constraint, DesignAnswer, DesignQuery, Exactness, GammaParams, LtQuery, MetricResult, MimoScheme, NetworkModel,
    QuadratureSpec, RetxConfig, RetxMode, SchemeTag,
};

use crate::config::{db_to_linear, dbm_to_watts, retx_mode_name, MetricKind, ScenarioConfig};
use crate::report::{provenance, Cell, Table};
use crate::sim::{self, SimConfig, SimEstimate};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "sgmimo", version, about = "MIMO performance in Poisson cellular networks: analysis, simulation and design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a scenario file and write one CSV per metric.
    Run { config: PathBuf },
    /// Pick antenna configurations meeting a reliability target.
    Design(DesignArgs),
    /// Check a scenario file and print its canonical form.
    Validate { config: PathBuf },
    /// Quick analytic self-checks against closed forms.
    Selftest,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Data streams per user (users per cell for SDMA).
    #[arg(long)]
    pub streams: u32,
    /// Largest acceptable outage probability.
    #[arg(long, conflicts_with = "max_asep", required_unless_present = "max_asep")]
    pub max_outage: Option<f64>,
    /// Largest acceptable symbol error probability.
    #[arg(long)]
    pub max_asep: Option<f64>,
    /// SIR threshold of the outage constraint, dB.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_db: f64,
    /// QAM constellation size for ASEP constraints.
    #[arg(long = "mod", default_value_t = 4)]
    pub modulation: u32,
    /// Comma-separated scheme families (default: all).
    #[arg(long, value_delimiter = ',')]
    pub schemes: Vec<SchemeTag>,
    /// Transmit-antenna limit per base station
    #[arg(long)]
    pub max_nt: Option<u32>,
    /// Receive-antenna limit per user
    #[arg(long)]
    pub max_nr: Option<u32>,
    /// Base stations per km².
    #[arg(long, default_value_t = 10.0)]
    pub lambda_b: f64,
    /// Base-station activity probability.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Path-loss exponent (> 2)
    #[arg(long, default_value_t = 4.0)]
    pub eta: f64,
    /// Transmit power per antenna, dBm.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub power_dbm: f64,
    /// Noise power, dBm.
    #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
    pub n0_dbm: f64,
    /// Also write the ranking as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Runs a parsed command line, printing to stdout; returns the exit code.
pub fn execute(cli: Cli) -> i32 {
    let r = match cli.command {
        Command::Run { config } => ScenarioConfig::read(&config).and_then(|c| run(&c)).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        Command::Design(a) => design(&a).map(|s| print!("{s}")),
        Command::Validate { config } => ScenarioConfig::read(&config).map(|c| print!("{}", c.to_text())),
        Command::Selftest => selftest().map(|s| print!("{s}")),
    };
    match r {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Evaluates `items` on the worker pool, keeping their order.
fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(items: &[T], f: F) -> Vec<U> {
    let threads = sim::worker_threads().min(items.len());
    if threads <= 1 {
        return items.iter().map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: std::sync::Mutex<Vec<Option<U>>> = std::sync::Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let v = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(v);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|v| v.expect("every item runs")).collect()
}

fn exactness_name(e: Exactness) -> &'static str {
    match e {
        Exactness::Exact => "exact",
        Exactness::Approximate => "approx",
    }
}

/// Quadrature problems met during a run.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn note(&mut self, what: String, r: &MetricResult) {
        if !r.converged() {
            self.0.push(format!("{what}: {:?}", r.diagnostics));
        }
    }
}

fn sim_cells(est: Option<SimEstimate>, analytic: f64) -> [Cell; 3] {
    match est {
        Some(e) => [e.mean.into(), e.half_width_95.into(), (e.mean - analytic).abs().into()],
        None => [Cell::Empty, Cell::Empty, Cell::Empty],
    }
}

fn scheme_cells(s: &MimoScheme, gp: &GammaParams) -> [Cell; 4] {
    [s.to_string().into(), gp.m_o.into(), gp.m_i.into(), exactness_name(gp.exactness).into()]
}

/// Evaluates every requested metric and writes the CSVs; returns their
/// paths. Fails with [`Error::Numeric`] after writing if any value carries
/// convergence diagnostics.
pub fn run(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let spec = QuadratureSpec::default();
    let net = cfg.network.model()?;
    let prov = provenance(cfg);
    std::fs::create_dir_all(&cfg.output.dir)?;
    let mut problems = Problems::default();
    let mut files = Vec::new();
    for &kind in &cfg.metric.kinds {
        let table = match kind {
            MetricKind::Outage => outage_table(cfg, &net, &spec, &mut problems)?,
            MetricKind::Asep => asep_table(cfg, &net, &spec, &mut problems)?,
            MetricKind::Rate => rate_table(cfg, &net, &spec, &mut problems)?,
            MetricKind::Throughput => throughput_table(cfg, &net, &spec, &mut problems)?,
            MetricKind::Retx => retx_table(cfg, &net, &spec, &mut problems)?,
        };
        let path = cfg.output.dir.join(format!("{}.csv", kind.name()));
        table.write_file(&path, Some(&prov), cfg.output.precision)?;
        files.push(path);
    }
    if problems.0.is_empty() {
        Ok(files)
    } else {
        Err(Error::Numeric(problems.0.join("; ")))
    }
}

fn sim_cfg(cfg: &ScenarioConfig) -> Option<SimConfig> {
    (cfg.sim.trials > 0).then(|| SimConfig::new(cfg.sim.trials, cfg.sim.seed))
}

fn outage_table(cfg: &ScenarioConfig, net: &NetworkModel, spec: &QuadratureSpec, problems: &mut Problems) -> Result<Table> {
    let mut t = Table::new(&["scheme", "m_o", "m_i", "gamma_map", "theta_db", "analytic", "err_estimate", "sim_mean", "sim_ci95", "abs_dev"]);
    let thetas = cfg.thetas();
    for s in &cfg.schemes {
        let gp = s.gamma_params()?;
        let analytic = par_map(&thetas, |&th| outage(net, &gp, th, spec));
        let simulated = match sim_cfg(cfg) {
            Some(c) => Some(sim::outage_curve(net, s, &thetas, &c)?),
            None => None,
        };
        for (j, a) in analytic.into_iter().enumerate() {
            let a = a?;
            problems.note(format!("outage {s} at {} dB", cfg.metric.theta_db[j]), &a);
            let mut row: Vec<Cell> = scheme_cells(s, &gp).into();
            row.extend([cfg.metric.theta_db[j].into(), a.value.into(), a.err_estimate.into()]);
            row.extend(sim_cells(simulated.as_ref().map(|v| v[j]), a.value));
            t.push(row);
        }
    }
    Ok(t)
}

/// Analytic ASEP for any scheme; SM-MIMO uses its joint-ML bound.
fn scheme_asep(net: &NetworkModel, s: &MimoScheme, method: AsepMethod, spec: &QuadratureSpec, m: u32) -> Result<MetricResult> {
    let modulation = qam(m)?;
    Ok(match s {
        MimoScheme::SmMimo { .. } => asep_sm(net, s, &modulation, spec)?,
        _ => asep(net, &s.gamma_params()?, &modulation, method, spec)?,
    })
}

fn method_name(s: &MimoScheme, method: AsepMethod, m_o: u32) -> &'static str {
    match (s, method.resolve(m_o)) {
        (MimoScheme::SmMimo { .. }, _) => "joint-ml",
        (_, AsepMethod::Jensen) => "jensen",
        _ => "exact",
    }
}

fn asep_table(cfg: &ScenarioConfig, net: &NetworkModel, spec: &QuadratureSpec, problems: &mut Problems) -> Result<Table> {
    let mut t = Table::new(&[
        "scheme", "m_o", "m_i", "gamma_map", "snr_db", "method", "analytic", "err_estimate", "interferers", "sim_mean", "sim_ci95", "abs_dev",
    ]);
    // (P / N0 in dB for the column, network at that power)
    let points: Vec<(Option<f64>, NetworkModel)> = if cfg.metric.snr_db.is_empty() {
        vec![(None, *net)]
    } else {
        if net.n0 == 0.0 {
            return Err(Error::Config("metric.snr needs a positive network.n0".into()));
        }
        cfg.metric.snr_db.iter().map(|&d| (Some(d), net.with_power(net.n0 * db_to_linear(d)))).collect()
    };
    let modulation = cfg.modulation()?;
    for s in &cfg.schemes {
        let gp = s.gamma_params()?;
        let analytic = par_map(&points, |(_, n)| scheme_asep(n, s, cfg.metric.asep_method, spec, cfg.modulation));
        let simulated = match sim_cfg(cfg) {
            Some(c) => {
                let ntp: Vec<f64> = points.iter().map(|(_, n)| n.n0 / n.power).collect();
                Some(sim::asep_curve(net, s, &modulation, &ntp, &cfg.sim.interferers, &c)?)
            }
            None => None,
        };
        for (j, a) in analytic.into_iter().enumerate() {
            let a = a?;
            problems.note(format!("ASEP {s} at point {j}"), &a);
            let head = |mode: Cell| {
                let mut row: Vec<Cell> = scheme_cells(s, &gp).into();
                row.extend([
                    points[j].0.into(),
                    method_name(s, cfg.metric.asep_method, gp.m_o).into(),
                    a.value.into(),
                    a.err_estimate.into(),
                    mode,
                ]);
                row
            };
            match &simulated {
                Some(per_mode) => {
                    for (mi, mode) in cfg.sim.interferers.iter().enumerate() {
                        let mut row = head(mode.to_string().into());
                        row.extend(sim_cells(Some(per_mode[mi][j]), a.value));
                        t.push(row);
                    }
                }
                None => {
                    let mut row = head(Cell::Empty);
                    row.extend(sim_cells(None, a.value));
                    t.push(row);
                }
            }
        }
    }
    Ok(t)
}

fn rate_table(cfg: &ScenarioConfig, net: &NetworkModel, spec: &QuadratureSpec, problems: &mut Problems) -> Result<Table> {
    let mut t = Table::new(&[
        "scheme", "m_o", "m_i", "gamma_map", "rate_nats_per_stream", "rate_bits_per_cell", "err_estimate", "sim_mean", "sim_ci95", "abs_dev",
    ]);
    let results = par_map(&cfg.schemes, |s| -> Result<(GammaParams, MetricResult)> {
        let gp = s.gamma_params()?;
        Ok((gp, ergodic_rate(net, &gp, spec)?))
    });
    for (s, r) in cfg.schemes.iter().zip(results) {
        let (gp, a) = r?;
        problems.note(format!("rate {s}"), &a);
        let simulated = match sim_cfg(cfg) {
            Some(c) => Some(sim::rate_estimate(net, s, &c)?),
            None => None,
        };
        let mut row: Vec<Cell> = scheme_cells(s, &gp).into();
        row.extend([a.value.into(), per_cell_rate_bits(a.value, s).into(), a.err_estimate.into()]);
        row.extend(sim_cells(simulated, a.value));
        t.push(row);
    }
    Ok(t)
}

fn throughput_table(cfg: &ScenarioConfig, net: &NetworkModel, spec: &QuadratureSpec, problems: &mut Problems) -> Result<Table> {
    let mut t = Table::new(&["scheme", "m_o", "m_i", "gamma_map", "qam", "asep", "err_estimate", "bits_per_stream", "bits_per_cell"]);
    let modulation = cfg.modulation()?;
    let results = par_map(&cfg.schemes, |s| scheme_asep(net, s, cfg.metric.asep_method, spec, cfg.modulation));
    for (s, r) in cfg.schemes.iter().zip(results) {
        let a = r?;
        problems.note(format!("throughput {s}"), &a);
        let gp = s.gamma_params()?;
        let per_stream = throughput(a.value, &modulation)?;
        let mut row: Vec<Cell> = scheme_cells(s, &gp).into();
        row.extend([
            cfg.modulation.into(),
            a.value.into(),
            a.err_estimate.into(),
            per_stream.into(),
            (per_stream * s.symbols_per_channel_use()).into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

fn retx_table(cfg: &ScenarioConfig, net: &NetworkModel, spec: &QuadratureSpec, problems: &mut Problems) -> Result<Table> {
    let mut t = Table::new(&[
        "slot1", "slot2", "theta_db", "correlated", "correlated_err", "independent", "independent_err", "sim_mean", "sim_ci95", "abs_dev",
    ]);
    let (s1, s2) = cfg.metric.retx.ok_or_else(|| Error::Config("the retx metric needs metric.retx_slot1".into()))?;
    let (g1, g2) = (s1.gamma_params()?, s2.gamma_params()?);
    let thetas = cfg.thetas();
    let jobs: Vec<(usize, RetxMode)> = (0..thetas.len()).flat_map(|j| cfg.metric.retx_modes.iter().map(move |&m| (j, m))).collect();
    let results = par_map(&jobs, |&(j, mode)| {
        let rc = RetxConfig {
            slot1: g1,
            slot2: g2,
            theta: thetas[j],
            net: *net,
        };
        coverage_retx(&rc, mode, spec)
    });
    let simulated = match sim_cfg(cfg) {
        Some(c) => Some(sim::two_slot_curve(net, &s1, &s2, &thetas, &c)?),
        None => None,
    };
    let mut values: Vec<[Option<MetricResult>; 2]> = vec![[None, None]; thetas.len()];
    for (&(j, mode), r) in jobs.iter().zip(results) {
        let r = r?;
        problems.note(format!("retx {} at {} dB", retx_mode_name(mode), cfg.metric.theta_db[j]), &r);
        values[j][(mode == RetxMode::Independent) as usize] = Some(r);
    }
    for (j, [c, i]) in values.into_iter().enumerate() {
        let mut row: Vec<Cell> = vec![s1.to_string().into(), s2.to_string().into(), cfg.metric.theta_db[j].into()];
        for r in [&c, &i] {
            row.push(r.as_ref().map(|r| r.value).into());
            row.push(r.as_ref().map(|r| r.err_estimate).into());
        }
        let reference = c.as_ref().or(i.as_ref()).map_or(f64::NAN, |r| r.value);
        row.extend(sim_cells(simulated.as_ref().map(|v| v[j].either), reference));
        t.push(row);
    }
    Ok(t)
}

/// Builds the design query the flags describe.
pub fn design_query(a: &DesignArgs) -> Result<DesignQuery> {
    let constraint = match (a.max_outage, a.max_asep) {
        (Some(eps), None) => Constraint::MaxOutage {
            eps,
            theta: db_to_linear(a.theta_db),
        },
        (None, Some(eps)) => Constraint::MaxAsep {
            eps,
            modulation: qam(a.modulation)?,
        },
        _ => return Err(Error::Config("give exactly one of --max-outage and --max-asep".into())),
    };
    let candidates = if a.schemes.is_empty() { SchemeTag::ALL.to_vec() } else { a.schemes.clone() };
    let net = NetworkModel::new(a.lambda_b / 1e6, a.p, a.eta, dbm_to_watts(a.power_dbm), dbm_to_watts(a.n0_dbm))?;
    let q = DesignQuery {
        constraint,
        required_streams: a.streams,
        net,
        candidates,
        budget: AntennaBudget {
            max_nt: a.max_nt,
            max_nr: a.max_nr,
        },
    };
    q.validate()?;
    Ok(q)
}

pub fn design_table(ans: &DesignAnswer) -> Table {
    let mut t = Table::new(&["rank", "scheme", "m_o", "m_i", "gamma_map", "nt", "nr", "achieved", "rate_bits_per_cell", "notes"]);
    for (i, o) in ans.options.iter().enumerate() {
        let (nt, nr) = o.scheme.antennas();
        let notes: Vec<String> = o.diagnostics.iter().map(|d| format!("{d:?}")).collect();
        t.push(vec![
            Cell::Int(i as u64 + 1),
            o.scheme.to_string().into(),
            o.gamma.m_o.into(),
            o.gamma.m_i.into(),
            exactness_name(o.gamma.exactness).into(),
            nt.into(),
            nr.into(),
            o.achieved.into(),
            o.per_cell_rate.into(),
            notes.join(" ").into(),
        ]);
    }
    t
}

/// Runs a design query and renders the ranking as fixed-width text.
pub fn design(a: &DesignArgs) -> Result<String> {
    let q = design_query(a)?;
    let ans = select(&q, &QuadratureSpec::default())?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:<28} {:>4} {:>4} {:>6} {:>3} {:>3} {:>11} {:>10}",
        "rank", "scheme", "m_o", "m_i", "map", "nt", "nr", "achieved", "bits/cell"
    );
    for (i, o) in ans.options.iter().enumerate() {
        let (nt, nr) = o.scheme.antennas();
        let _ = writeln!(
            out,
            "{:>4}  {:<28} {:>4} {:>4} {:>6} {:>3} {:>3} {:>11.5e} {:>10.4}",
            i + 1,
            o.scheme.to_string(),
            o.gamma.m_o,
            o.gamma.m_i,
            exactness_name(o.gamma.exactness),
            nt,
            nr,
            o.achieved,
            o.per_cell_rate
        );
    }
    for (tag, e) in &ans.rejected {
        let _ = writeln!(out, "rejected {tag}: {e}");
    }
    if let Some(path) = &a.csv {
        let prov = format!("{a:?}");
        design_table(&ans).write_file(path, Some(&prov), crate::config::DEFAULT_PRECISION)?;
    }
    Ok(out)
}

/// Analytic spot checks; fails with [`Error::Numeric`] if any is off.
pub fn selftest() -> Result<String> {
    let spec = QuadratureSpec::default();
    let net = NetworkModel::new(1e-5, 1.0, 4.0, 1.0, 0.0)?;
    let siso = GammaParams::new(1, 1)?;
    let mut checks: Vec<(String, f64, f64)> = Vec::new();
    let closed = |theta: f64| {
        let s = theta.sqrt();
        1.0 - 1.0 / (1.0 + s * (std::f64::consts::FRAC_PI_2 - (1.0 / s).atan()))
    };
    for db in [-10.0, 0.0, 10.0, 20.0] {
        let th = db_to_linear(db);
        checks.push((format!("SISO outage at {db} dB vs closed form"), (outage(&net, &siso, th, &spec)?.value - closed(th)).abs(), 1e-6));
    }
    let gp = GammaParams::new(3, 2)?;
    let series = 1.0 - outage(&net, &gp, 2.0, &spec)?.value;
    checks.push(("(3,2) coverage: derivative series vs resolvent form".into(), (series - coverage_closed_form(&net, &gp, 2.0)?).abs(), 1e-8));
    let rate = ergodic_rate(&net, &siso, &spec)?.value;
    checks.push(("SISO ergodic rate vs 1.48899 nats".into(), (rate - 1.48899).abs(), 1e-4));
    let q = LtQuery { z: 3e8, r0: 150.0, m_i: 2 };
    let joint = joint_lt_interference(&net, 150.0, 3e8, 0.0, 2, 1, &spec)?.value;
    checks.push(("joint transform with z2 = 0 vs single slot".into(), (joint - lt_interference(&net, &q)?).abs(), 1e-9));
    let mut out = String::new();
    let mut failed = 0;
    for (name, err, tol) in &checks {
        let ok = err <= tol;
        failed += !ok as usize;
        let _ = writeln!(out, "{} {name}: |error| = {err:.3e} (tolerance {tol:.0e})", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        print!("{out}");
        return Err(Error::Numeric(format!("{failed} self-check(s) failed")));
    }
    Ok(out)
}

/// Reads a CSV written by `run` and returns its provenance config.
pub fn provenance_of(path: &Path) -> Result<ScenarioConfig> {
    crate::report::config_from_csv(&std::fs::read_to_string(path)?)
}
