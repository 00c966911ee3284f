//! Library side of the `failprop` command-line tool. Each `cmd_*` function
//! performs one subcommand, writes its files into an output directory and
//! returns the one-line summary the binary prints to stderr.

pub mod config;
pub mod presets;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use failprop_core::epidemic::Aggregate;
use failprop_core::metrics::{self, Stabilization, SweepError};
use failprop_core::rng::derive_seed;
use failprop_core::{
    monte_carlo, run, run_horizontal, run_vertical, threshold_sweep, validate, Counts, EpidemicParams, HorizontalScenario,
    Network, NodeId, StopReason, StopRule, SweepSpec, TopologyKind, VerticalScenario,
};

pub use config::{CascadeKind, Experiment, ExperimentConfig};

/// Errors mapped onto the tool's stable exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Topology(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Runs `f` on a pool with `threads` workers (0 = one per core).
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

fn resolve_seeds(net: &Network, tokens: &[String]) -> Result<Vec<NodeId>, CliError> {
    tokens
        .iter()
        .map(|t| net.resolve(t).ok_or_else(|| CliError::Config(format!("seed node `{t}` is not in the topology"))))
        .collect()
}

fn model_section(cfg: &ExperimentConfig) -> Result<&config::ModelSection, CliError> {
    match &cfg.experiment {
        Experiment::Epidemic(m) => Ok(m),
        Experiment::Cascade(_) => Err(CliError::Config("this command needs a [model] section".into())),
    }
}

#[derive(Serialize)]
struct ReplicaSummary {
    rng_seed: u64,
    final_counts: Counts,
    outbreak_size: f64,
    stabilization: Stabilization,
    dp_connectivity: f64,
    stop_reason: StopReason,
    ticks: u64,
}

#[derive(Serialize)]
struct EpidemicSummary<'a> {
    experiment: &'static str,
    params: EpidemicParams,
    seeds: Vec<NodeId>,
    node_count: usize,
    rng_seed: u64,
    max_ticks: u64,
    stop: StopRule,
    replica0: ReplicaSummary,
    aggregate: &'a Aggregate,
}

/// Monte Carlo epidemic run. Writes `trace.csv` and `events.csv` for
/// replica 0, `summary.json` with the aggregate, and `resolved-config.txt`.
pub fn cmd_epidemic(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let model = model_section(cfg)?;
    let net = cfg.build_network()?;
    let seeds = resolve_seeds(&net, &model.seeds)?;
    let r = &cfg.run;
    let p = model.params;
    let (agg, trace) = with_threads(r.threads, || {
        let agg = monte_carlo(&net, &seeds, &p, r.max_ticks, r.stop, r.n_runs, r.rng_seed);
        let trace = run(&net, &seeds, &p, r.max_ticks, r.stop, derive_seed(r.rng_seed, 0));
        (agg, trace)
    })?;
    let agg = agg.map_err(|e| CliError::Runtime(e.to_string()))?;
    let trace = trace.map_err(|e| CliError::Runtime(e.to_string()))?;

    prepare_out(out)?;
    if cfg.output.csv {
        write_file(out, "trace.csv", &trace.to_csv())?;
        write_file(out, "events.csv", &trace.events_csv())?;
    }
    let final_counts = *trace.counts.last().expect("trace has tick 0");
    let outbreak = metrics::outbreak_size(&trace);
    if cfg.output.json {
        let summary = EpidemicSummary {
            experiment: "epidemic",
            params: p,
            seeds: seeds.clone(),
            node_count: net.node_count(),
            rng_seed: r.rng_seed,
            max_ticks: r.max_ticks,
            stop: r.stop,
            replica0: ReplicaSummary {
                rng_seed: derive_seed(r.rng_seed, 0),
                final_counts,
                outbreak_size: outbreak,
                stabilization: metrics::stabilization_time(&trace),
                dp_connectivity: metrics::dp_connectivity(&net, &trace.final_state),
                stop_reason: trace.stop_reason,
                ticks: trace.last_tick(),
            },
            aggregate: &agg,
        };
        write_file(out, "summary.json", &to_json(&summary)?)?;
    }
    write_file(out, "resolved-config.txt", &cfg.resolved_text(&net))?;
    Ok(format!(
        "epidemic {}: final S={} I={} R={} D={} outbreak={} (mean {:.4} over {} runs)",
        p.model, final_counts.s, final_counts.i, final_counts.r, final_counts.d, outbreak, agg.mean_outbreak, agg.n_runs
    ))
}

/// Deterministic cascade. Writes `trace.csv`, `events.csv`, `summary.json`,
/// `resolved-config.txt`, and for horizontal runs `dropped.csv`.
pub fn cmd_cascade(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let Experiment::Cascade(sc_cfg) = &cfg.experiment else {
        return Err(CliError::Config("this command needs a [scenario] section".into()));
    };
    let net = cfg.build_network()?;
    let scenario_err = |e: failprop_core::ScenarioError| CliError::Config(e.to_string());
    prepare_out(out)?;
    let line = match sc_cfg.kind {
        CascadeKind::Vertical => {
            let sc = VerticalScenario::from_sections(&sc_cfg.sections, &net).map_err(scenario_err)?;
            let trace = run_vertical(&net, &sc).map_err(scenario_err)?;
            let summary = trace.summary(&net);
            for s in &summary.unassigned_switches {
                eprintln!("warning: switch {s} has no controller preferences");
            }
            if cfg.output.csv {
                write_file(out, "trace.csv", &trace.to_csv(&net, &sc))?;
                write_file(out, "events.csv", &vertical_events(&net, &trace))?;
            }
            if cfg.output.json {
                write_file(out, "summary.json", &to_json(&summary)?)?;
            }
            format!(
                "vertical cascade: {} rounds, failed controllers [{}], {} orphaned switches, failed fraction {}",
                summary.rounds,
                summary.failed_controllers.join(", "),
                summary.orphaned_switches.len(),
                summary.failed_fraction
            )
        }
        CascadeKind::Horizontal => {
            let mut sc = HorizontalScenario::from_sections(&sc_cfg.sections, &net).map_err(scenario_err)?;
            sc.misroute = sc_cfg.misroute;
            for w in sc.validate(&net).map_err(scenario_err)? {
                eprintln!("warning: {w}");
            }
            let trace = run_horizontal(&net, &sc).map_err(scenario_err)?;
            let summary = trace.summary(&net);
            if cfg.output.csv {
                write_file(out, "trace.csv", &trace.to_csv(&net, &sc))?;
                write_file(out, "events.csv", &horizontal_events(&net, &trace))?;
                write_file(out, "dropped.csv", &trace.dropped_csv(&net))?;
            }
            if cfg.output.json {
                write_file(out, "summary.json", &to_json(&summary)?)?;
            }
            format!(
                "horizontal cascade: {} rounds, {} failed nodes [{}], {} dropped demands, failed fraction {}",
                summary.rounds,
                summary.failed_nodes.len(),
                summary.failed_nodes.join(", "),
                summary.dropped_demands.len(),
                summary.failed_fraction
            )
        }
    };
    write_file(out, "resolved-config.txt", &cfg.resolved_text(&net))?;
    Ok(line)
}

/// `round,node,event,detail` log of controller failures and switch
/// failovers.
fn vertical_events(net: &Network, trace: &failprop_core::VerticalTrace) -> String {
    let mut out = String::from("round,node,event,detail\n");
    let mut prev: Option<&BTreeMap<NodeId, Option<NodeId>>> = None;
    for r in &trace.rounds {
        if let Some(prev) = prev {
            for (s, ctrl) in &r.assignment.controller_of {
                if prev.get(s) != Some(ctrl) {
                    match ctrl {
                        Some(c) => out.push_str(&format!("{},{},switch_failover,{}\n", r.round, net.label(*s), net.label(*c))),
                        None => out.push_str(&format!("{},{},switch_orphaned,\n", r.round, net.label(*s))),
                    }
                }
            }
        }
        for c in &r.newly_failed {
            out.push_str(&format!("{},{},controller_failed,{}\n", r.round, net.label(*c), r.load[c]));
        }
        prev = Some(&r.assignment.controller_of);
    }
    out
}

fn horizontal_events(net: &Network, trace: &failprop_core::HorizontalTrace) -> String {
    let mut out = String::from("round,node,event,detail\n");
    for r in &trace.rounds {
        for v in &r.newly_failed {
            out.push_str(&format!("{},{},node_failed,{}\n", r.round, net.label(*v), r.routing.loads.get(*v)));
        }
    }
    out
}

/// Outbreak size over the `[sweep] grid` of beta values. Writes
/// `sweep.csv`, `summary.txt`, optionally `summary.json`, and
/// `resolved-config.txt`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let model = model_section(cfg)?;
    let grid = cfg
        .sweep_grid
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section with `grid`".into()))?;
    let net = cfg.build_network()?;
    let seeds = resolve_seeds(&net, &model.seeds)?;
    let r = &cfg.run;
    let spec = SweepSpec {
        net: &net,
        seeds: &seeds,
        params: model.params,
        grid,
        n_runs: r.n_runs,
        max_ticks: r.max_ticks,
        stop: r.stop,
        epsilon: r.epsilon,
        base_seed: r.rng_seed,
    };
    for &beta in grid {
        EpidemicParams { beta, ..model.params }
            .validate()
            .map_err(|e| CliError::Config(format!("grid value {beta}: {e}")))?;
    }
    let result = with_threads(r.threads, || threshold_sweep(&spec))?.map_err(|e| match e {
        SweepError::Engine(e) => CliError::Runtime(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    prepare_out(out)?;
    if cfg.output.csv {
        write_file(out, "sweep.csv", &result.to_csv())?;
    }
    write_file(out, "summary.txt", &format!("{}\n", result.threshold_line()))?;
    if cfg.output.json {
        write_file(out, "summary.json", &to_json(&result)?)?;
    }
    write_file(out, "resolved-config.txt", &cfg.resolved_text(&net))?;
    Ok(format!("sweep over {} points: {}", result.points.len(), result.threshold_line()))
}

/// Generates a topology and returns it as edge-list text, after checking
/// that the text loads back into the same network.
pub fn cmd_gen(spec: &str, seed: u64) -> Result<String, CliError> {
    let kind: TopologyKind = spec.parse().map_err(|e: failprop_core::TopologyError| CliError::Config(e.to_string()))?;
    let net = failprop_core::generate_topology(kind, seed).map_err(|e| CliError::Config(e.to_string()))?;
    let text = format!("# generated: {kind} seed {seed}\n{}", net.to_edge_list());
    let back = failprop_core::load_edge_list(&text).map_err(|e| CliError::Runtime(e.to_string()))?;
    if back != net {
        return Err(CliError::Runtime("generated topology does not round-trip".into()));
    }
    Ok(text)
}

/// Human-readable validation report; the flag is false on violations.
pub fn cmd_validate(net: &Network) -> (String, bool) {
    let report = validate(net);
    let mut out = format!(
        "nodes={} edges={} controllers={} switches={}\n",
        net.node_count(),
        net.edge_count(),
        net.controllers().count(),
        net.switches().count()
    );
    for v in &report.violations {
        out.push_str(&format!("violation: {v}\n"));
    }
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    if report.is_valid() {
        out.push_str("ok\n");
    }
    (out, report.is_valid())
}

/// Output directory: explicit flag, then config, then `FAILPROP_OUT`, then
/// `failprop-out`.
pub fn output_dir(flag: Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .or_else(|| std::env::var_os("FAILPROP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("failprop-out"))
}

/// Loads a config from a path or a built-in preset name.
pub fn load_config(path: Option<&Path>, preset: Option<&str>) -> Result<ExperimentConfig, CliError> {
    match (path, preset) {
        (Some(p), None) => ExperimentConfig::load(p),
        (None, Some(name)) => {
            let text = presets::lookup(name).ok_or_else(|| {
                CliError::Config(format!("unknown preset `{name}` (available: {})", presets::names().join(", ")))
            })?;
            ExperimentConfig::parse(text, Path::new("."))
        }
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or --preset, not both".into())),
        (None, None) => Err(CliError::Config("missing --config or --preset".into())),
    }
}
