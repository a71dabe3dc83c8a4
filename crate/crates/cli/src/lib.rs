//! Command implementations behind the `nvmo` binary.
//!
//! Each command writes its human-readable output to the given writer and
//! returns a [`CliError`] whose [`exit_code`](CliError::exit_code) is 1 for
//! invalid input and 2 for failures during a run.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use nvmo::bounds::{AveragingReport, TrackingReport};
use nvmo::graph::Digraph;
use nvmo::report::{run_plots, summary_text, write_metrics_csv};
use nvmo::scenario::{load_scenario, ScenarioJson};
use nvmo::sim::{target_motion_sups, Scenario, Simulation};
use nvmo::Error;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        // anything that fails mid-run is a runtime failure, whatever its cause
        match e {
            Error::Scenario(_)
            | Error::InvalidNode { .. }
            | Error::InvalidFeatureModel(_)
            | Error::GraphAssumption { .. }
            | Error::EnumerationLimit { .. }
            | Error::TrackingThreshold { .. }
            | Error::Domain(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario_path: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub emit_svg: bool,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

impl RunConfig {
    pub fn new(scenario_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            scenario_path: scenario_path.into(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            emit_svg: false,
            dt: None,
            horizon: None,
        }
    }
}

fn load(path: &Path) -> CliResult<Scenario> {
    if !path.is_file() {
        return Err(CliError::Validation(format!(
            "scenario file not found: {}",
            path.display()
        )));
    }
    Ok(load_scenario(path)?)
}

/// Runs the scenario and writes `metrics.csv`, `summary.txt` and, if asked,
/// SVG plots into the output directory. Returns the summary text.
pub fn cmd_simulate(cfg: &RunConfig, out: &mut impl Write) -> CliResult<String> {
    let mut sc = load(&cfg.scenario_path)?;
    if let Some(dt) = cfg.dt {
        sc.dt = dt;
    }
    if let Some(h) = cfg.horizon {
        sc.horizon = h;
    }
    sc.validate()?;
    log::info!(
        "simulating {} cameras for {} s at dt={} ({} steps)",
        sc.len(),
        sc.horizon,
        sc.dt,
        sc.steps()
    );

    let mut sim = Simulation::new(&sc, cfg.seed)?;
    let mut records = Vec::with_capacity(sc.steps() + 1);
    records.push(sim.record()?);
    let report_every = (sc.steps() / 10).max(1);
    while !sim.is_done() {
        sim.advance()?;
        records.push(sim.record()?);
        if sim.step_index() % report_every == 0 {
            let r = records.last().unwrap();
            log::debug!("t={:.3} U_p={:.4e} U_R={:.4e}", r.t, r.u_p, r.u_r);
        }
    }

    fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("metrics.csv");
    write_metrics_csv(io::BufWriter::new(fs::File::create(&csv_path)?), &records)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let tracking = sim.tracking_report();
    let summary = summary_text(&sc, &records, sim.averaging_report(), tracking.as_ref());
    fs::write(cfg.output_dir.join("summary.txt"), &summary)?;
    if cfg.emit_svg {
        for (name, svg) in run_plots(&records) {
            fs::write(cfg.output_dir.join(name), svg)?;
        }
    }
    log::info!("wrote {}", csv_path.display());
    write!(out, "{summary}")?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub scenario_path: PathBuf,
    pub epsilon: Option<f64>,
    pub c: Option<f64>,
}

fn kv(out: &mut impl Write, key: &str, value: impl fmt::Display) -> io::Result<()> {
    writeln!(out, "  {key:<12} {value}")
}

/// Prints the averaging levels and, for moving targets, the tracking levels
/// (from the target motion alone), as aligned text followed by JSON.
pub fn cmd_bounds(cfg: &BoundsConfig, out: &mut impl Write) -> CliResult<()> {
    let mut sc = load(&cfg.scenario_path)?;
    if let Some(e) = cfg.epsilon {
        sc.epsilon = e;
    }
    if let Some(c) = cfg.c {
        sc.c = c;
    }
    sc.validate()?;
    let targets: Vec<_> = sc.targets.iter().map(|t| t.pose).collect();
    let w = sc.graph.compute_w()?;
    let avg = AveragingReport::compute(&targets, sc.gains.k_e, sc.gains.k_s, w.w, sc.epsilon, sc.c)?;
    writeln!(out, "averaging (targets at t=0)")?;
    kv(out, "W", avg.w_const)?;
    kv(out, "k", avg.k)?;
    kv(out, "rho_p", format!("{:.6e}", avg.rho_p))?;
    kv(out, "rho_R", format!("{:.6e}", avg.rho_r))?;
    kv(out, "phi_max", format!("{:.6}", avg.phi_m))?;
    kv(out, "beta", format!("{:.6}", avg.beta))?;
    kv(out, "epsilon", avg.epsilon)?;
    kv(out, "c", avg.c)?;
    kv(out, "eps_p", format!("{:.6}", avg.eps_p))?;
    kv(out, "eps_R", format!("{:.6}", avg.eps_r))?;

    let mut json = serde_json::json!({ "averaging": avg });
    if !sc.is_static() {
        let (gamma, rho_p, rho_r) = target_motion_sups(&sc)?;
        let (w_p, w_r) = sc.velocity_bounds();
        let tr = TrackingReport::compute(sc.gains.k_e, gamma, w_p, w_r, rho_p, rho_r)?;
        writeln!(out, "tracking (over the horizon)")?;
        kv(out, "gamma", format!("{:.6}", tr.gamma))?;
        kv(out, "mu", format!("{:.6}", tr.mu))?;
        kv(out, "w_bar_p", tr.w_bar_p)?;
        kv(out, "w_bar_R", tr.w_bar_r)?;
        kv(out, "rho'_p", format!("{:.6e}", tr.rho_p_sup))?;
        kv(out, "rho'_R", format!("{:.6e}", tr.rho_r_sup))?;
        kv(out, "eps'_p", format!("{:.6}", tr.eps_p_track))?;
        kv(out, "eps'_R", format!("{:.6}", tr.eps_r_track))?;
        json["tracking"] = serde_json::to_value(tr).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&json).map_err(|e| CliError::Runtime(e.to_string()))?
    )?;
    Ok(())
}

/// Prints Assumption 1 flags, `W` and its witness tree. Fails (after
/// printing the flags) when the graph is unbalanced or not strongly
/// connected.
pub fn cmd_graph(scenario_path: &Path, out: &mut impl Write) -> CliResult<()> {
    if !scenario_path.is_file() {
        return Err(CliError::Validation(format!(
            "scenario file not found: {}",
            scenario_path.display()
        )));
    }
    let text = fs::read_to_string(scenario_path)?;
    let raw: ScenarioJson = serde_json::from_str(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    let n = raw.cameras.len();
    let edges = raw.graph.edges.iter().map(|e| (e[0], e[1]));
    let g = if raw.graph.undirected {
        Digraph::bidirectional(n, edges)?
    } else {
        Digraph::new(n, edges)?
    };
    let flags = g.validate_assumption1();
    writeln!(out, "nodes              {}", g.node_count())?;
    writeln!(out, "edges              {}", g.edge_count())?;
    writeln!(out, "balanced           {}", flags.balanced)?;
    writeln!(out, "strongly_connected {}", flags.strongly_connected)?;
    if !flags.holds() {
        return Err(CliError::Validation(
            Error::GraphAssumption {
                balanced: flags.balanced,
                strongly_connected: flags.strongly_connected,
            }
            .to_string(),
        ));
    }
    let w = g.compute_w()?;
    writeln!(out, "W                  {}", w.w)?;
    writeln!(out, "witness root       {}", w.witness.root)?;
    writeln!(out, "witness edges (load):")?;
    for (a, b) in &w.witness.tree_edges {
        writeln!(out, "  {a} - {b}  {}", w.witness.per_edge_load[&(*a, *b)])?;
    }
    Ok(())
}
