//! Experiment configuration: a sectioned text file in the same syntax as
//! edge-list and scenario files.
//!
//! ```text
//! [topology]            # generator = ring 10 | file = net.txt, seed = N
//! [edges] [roles] [controllers] [aliases] [nodes]   # or an inline topology
//! [model]               # model, beta, delta1, tau, gamma, seeds
//! [scenario]            # kind = vertical | horizontal, misroute
//! [capacity] [rate] [attack] [demand] [injection]
//! [run]                 # max_ticks, n_runs, rng_seed, stop, epsilon, threads
//! [sweep]               # grid = b1, b2, ...
//! [output]              # dir, formats = csv,json
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use failprop_core::sections::{self, Line, Section};
use failprop_core::topology::{self, TOPOLOGY_SECTIONS};
use failprop_core::{generate_topology, EpidemicParams, Model, Network, StopRule, TopologyKind};

use crate::CliError;

const SCENARIO_SECTIONS: [&str; 5] = ["capacity", "rate", "attack", "demand", "injection"];

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySource {
    Generator { kind: TopologyKind, seed: u64 },
    File(PathBuf),
    /// Edge-list text embedded in the config.
    Inline(Vec<Section>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeKind {
    Vertical,
    Horizontal,
}

impl CascadeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CascadeKind::Vertical => "vertical",
            CascadeKind::Horizontal => "horizontal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub params: EpidemicParams,
    /// Seed node tokens, resolved against the network later.
    pub seeds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSection {
    pub kind: CascadeKind,
    pub misroute: bool,
    /// The `[capacity]`, `[rate]`, ... sections as written.
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Epidemic(ModelSection),
    Cascade(ScenarioSection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub max_ticks: u64,
    pub n_runs: usize,
    pub rng_seed: u64,
    pub stop: StopRule,
    pub epsilon: f64,
    /// Worker threads for replicas; 0 uses every core. Never affects output.
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            max_ticks: 100,
            n_runs: 1,
            rng_seed: 0,
            stop: StopRule::Absorb,
            epsilon: 0.05,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologySource,
    pub experiment: Experiment,
    pub run: RunSection,
    pub sweep_grid: Option<Vec<f64>>,
    pub output: OutputSection,
}

fn config_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("line {line}: {}", msg.into()))
}

/// `key = value` pairs of one section, with unknown keys rejected.
fn keyed<'a>(section: &'a Section, allowed: &[&str]) -> Result<BTreeMap<&'a str, (&'a str, usize)>, CliError> {
    let mut out = BTreeMap::new();
    for Line { number, text } in &section.lines {
        let (k, v) = sections::key_value(text).ok_or_else(|| config_err(*number, format!("expected `key = value`, got `{text}`")))?;
        if !allowed.contains(&k) {
            return Err(config_err(
                *number,
                format!("unknown key `{k}` in [{}]", section.name.as_deref().unwrap_or("")),
            ));
        }
        if out.insert(k, (v, *number)).is_some() {
            return Err(config_err(*number, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(field: &str, raw: Option<&(&str, usize)>, default: T) -> Result<T, CliError> {
    match raw {
        None => Ok(default),
        Some((v, line)) => v
            .parse()
            .map_err(|_| config_err(*line, format!("invalid value `{v}` for {field}"))),
    }
}

impl ExperimentConfig {
    /// Parses config text. Relative topology file paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let secs = sections::parse(text);
        let mut topo_sections = Vec::new();
        let mut scenario_sections = Vec::new();
        let mut named: BTreeMap<&str, &Section> = BTreeMap::new();
        for s in &secs {
            let Some(name) = s.name.as_deref() else {
                topo_sections.push(s.clone());
                continue;
            };
            if TOPOLOGY_SECTIONS.contains(&name) {
                topo_sections.push(s.clone());
            } else if SCENARIO_SECTIONS.contains(&name) {
                scenario_sections.push(s.clone());
            } else if ["topology", "model", "scenario", "run", "sweep", "output"].contains(&name) {
                if named.insert(name, s).is_some() {
                    return Err(config_err(s.header_line, format!("duplicate section [{name}]")));
                }
            } else {
                return Err(config_err(s.header_line, format!("unknown section [{name}]")));
            }
        }

        let run = match named.get("run") {
            Some(s) => {
                let kv = keyed(s, &["max_ticks", "n_runs", "rng_seed", "stop", "epsilon", "threads"])?;
                let d = RunSection::default();
                let run = RunSection {
                    max_ticks: parse_field("max_ticks", kv.get("max_ticks"), d.max_ticks)?,
                    n_runs: parse_field("n_runs", kv.get("n_runs"), d.n_runs)?,
                    rng_seed: parse_field("rng_seed", kv.get("rng_seed"), d.rng_seed)?,
                    stop: parse_field("stop", kv.get("stop"), d.stop)?,
                    epsilon: parse_field("epsilon", kv.get("epsilon"), d.epsilon)?,
                    threads: parse_field("threads", kv.get("threads"), d.threads)?,
                };
                if run.max_ticks == 0 {
                    return Err(CliError::Config("max_ticks must be positive".into()));
                }
                if run.n_runs == 0 {
                    return Err(CliError::Config("n_runs must be positive".into()));
                }
                if !(run.epsilon > 0.0 && run.epsilon < 1.0) {
                    return Err(CliError::Config(format!("epsilon must lie in (0, 1), got {}", run.epsilon)));
                }
                run
            }
            None => RunSection::default(),
        };

        let topology = match named.get("topology") {
            Some(s) => {
                let kv = keyed(s, &["generator", "file", "seed"])?;
                if !topo_sections.is_empty() {
                    return Err(CliError::Config("give either [topology] or an inline edge list, not both".into()));
                }
                match (kv.get("generator"), kv.get("file")) {
                    (Some((g, line)), None) => TopologySource::Generator {
                        kind: g.parse().map_err(|e| config_err(*line, format!("{e}")))?,
                        seed: parse_field("seed", kv.get("seed"), run.rng_seed)?,
                    },
                    (None, Some((f, _))) => TopologySource::File(base_dir.join(f)),
                    _ => return Err(config_err(s.header_line, "[topology] needs exactly one of `generator` or `file`")),
                }
            }
            None if !topo_sections.is_empty() => TopologySource::Inline(topo_sections),
            None => return Err(CliError::Config("no topology given".into())),
        };

        let experiment = match (named.get("model"), named.get("scenario")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("a config may hold a [model] or a [scenario], not both".into()))
            }
            (Some(s), None) => {
                if !scenario_sections.is_empty() {
                    return Err(CliError::Config("cascade sections are only valid with a [scenario]".into()));
                }
                let kv = keyed(s, &["model", "beta", "delta1", "tau", "gamma", "seeds"])?;
                let (m, line) = kv.get("model").ok_or_else(|| config_err(s.header_line, "[model] needs `model`"))?;
                let model: Model = m.parse().map_err(|e: String| config_err(*line, e))?;
                let params = EpidemicParams {
                    model,
                    beta: parse_field("beta", kv.get("beta"), 0.0)?,
                    delta1: parse_field("delta1", kv.get("delta1"), 0.0)?,
                    tau: parse_field("tau", kv.get("tau"), 0.0)?,
                    gamma: parse_field("gamma", kv.get("gamma"), 0.0)?,
                };
                params.validate().map_err(|e| CliError::Config(e.to_string()))?;
                let seeds: Vec<String> = kv
                    .get("seeds")
                    .map(|(v, _)| v.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect())
                    .unwrap_or_else(|| vec!["0".to_string()]);
                if seeds.is_empty() {
                    return Err(CliError::Config("seeds must list at least one node".into()));
                }
                Experiment::Epidemic(ModelSection { params, seeds })
            }
            (None, Some(s)) => {
                let kv = keyed(s, &["kind", "misroute"])?;
                let kind = match kv.get("kind") {
                    Some(("vertical", _)) => CascadeKind::Vertical,
                    Some(("horizontal", _)) => CascadeKind::Horizontal,
                    Some((other, line)) => {
                        return Err(config_err(*line, format!("kind must be vertical or horizontal, got `{other}`")))
                    }
                    None => return Err(config_err(s.header_line, "[scenario] needs `kind`")),
                };
                let misroute = parse_field("misroute", kv.get("misroute"), false)?;
                let allowed: &[&str] = match kind {
                    CascadeKind::Vertical => &["capacity", "rate", "attack"],
                    CascadeKind::Horizontal => &["capacity", "demand", "injection"],
                };
                if let Some(bad) = scenario_sections.iter().find(|x| !allowed.contains(&x.name.as_deref().unwrap_or(""))) {
                    return Err(config_err(
                        bad.header_line,
                        format!("section [{}] does not apply to a {} scenario", bad.name.as_deref().unwrap_or(""), kind.as_str()),
                    ));
                }
                if misroute && kind == CascadeKind::Vertical {
                    return Err(CliError::Config("misroute only applies to horizontal scenarios".into()));
                }
                Experiment::Cascade(ScenarioSection { kind, misroute, sections: scenario_sections })
            }
            (None, None) => return Err(CliError::Config("config needs a [model] or a [scenario] section".into())),
        };

        let sweep_grid = match named.get("sweep") {
            Some(s) => {
                let kv = keyed(s, &["grid"])?;
                let grid = match kv.get("grid") {
                    Some((v, line)) => v
                        .split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(|t| t.parse::<f64>().map_err(|_| config_err(*line, format!("invalid grid value `{t}`"))))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => Vec::new(),
                };
                Some(grid)
            }
            None => None,
        };

        let output = match named.get("output") {
            Some(s) => {
                let kv = keyed(s, &["dir", "formats"])?;
                let (mut csv, mut json) = (true, true);
                if let Some((f, line)) = kv.get("formats") {
                    csv = false;
                    json = false;
                    for fmt in f.split(',').map(str::trim) {
                        match fmt {
                            "csv" => csv = true,
                            "json" => json = true,
                            other => return Err(config_err(*line, format!("unknown format `{other}`"))),
                        }
                    }
                }
                OutputSection { dir: kv.get("dir").map(|(d, _)| base_dir.join(d)), csv, json }
            }
            None => OutputSection { dir: None, csv: true, json: true },
        };

        Ok(ExperimentConfig { topology, experiment, run, sweep_grid, output })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Builds the network. Generator parameter problems are config errors;
    /// unreadable or malformed topology data are topology errors.
    pub fn build_network(&self) -> Result<Network, CliError> {
        match &self.topology {
            TopologySource::Generator { kind, seed } => {
                generate_topology(*kind, *seed).map_err(|e| CliError::Config(e.to_string()))
            }
            TopologySource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Topology(format!("cannot read {}: {e}", path.display())))?;
                topology::load_edge_list(&text).map_err(|e| CliError::Topology(format!("{}: {e}", path.display())))
            }
            TopologySource::Inline(secs) => {
                topology::from_sections(secs).map_err(|e| CliError::Topology(e.to_string()))
            }
        }
    }

    /// Config text that reproduces this run exactly: every value explicit,
    /// file topologies embedded inline.
    pub fn resolved_text(&self, net: &Network) -> String {
        let mut out = String::from("# resolved experiment configuration\n");
        match &self.topology {
            TopologySource::Generator { kind, seed } => {
                let _ = write!(out, "[topology]\ngenerator = {kind}\nseed = {seed}\n");
            }
            TopologySource::File(_) | TopologySource::Inline(_) => out.push_str(&net.to_edge_list()),
        }
        match &self.experiment {
            Experiment::Epidemic(m) => {
                let p = m.params;
                let _ = write!(
                    out,
                    "[model]\nmodel = {}\nbeta = {}\ndelta1 = {}\ntau = {}\ngamma = {}\nseeds = {}\n",
                    p.model,
                    p.beta,
                    p.delta1,
                    p.tau,
                    p.gamma,
                    m.seeds.join(",")
                );
            }
            Experiment::Cascade(s) => {
                let _ = write!(out, "[scenario]\nkind = {}\nmisroute = {}\n", s.kind.as_str(), s.misroute);
                for sec in &s.sections {
                    let _ = writeln!(out, "[{}]", sec.name.as_deref().unwrap_or(""));
                    for l in &sec.lines {
                        let _ = writeln!(out, "{}", l.text);
                    }
                }
            }
        }
        let r = &self.run;
        let _ = write!(
            out,
            "[run]\nmax_ticks = {}\nn_runs = {}\nrng_seed = {}\nstop = {}\nepsilon = {}\nthreads = {}\n",
            r.max_ticks, r.n_runs, r.rng_seed, r.stop, r.epsilon, r.threads
        );
        if let Some(grid) = &self.sweep_grid {
            let g: Vec<String> = grid.iter().map(f64::to_string).collect();
            let _ = write!(out, "[sweep]\ngrid = {}\n", g.join(", "));
        }
        let mut formats = Vec::new();
        if self.output.csv {
            formats.push("csv");
        }
        if self.output.json {
            formats.push("json");
        }
        let _ = write!(out, "[output]\nformats = {}\n", formats.join(","));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::parse(text, Path::new(""))
    }

    #[test]
    fn minimal_epidemic() {
        let c = parse("[topology]\ngenerator = ring 10\n[model]\nmodel = SI\nbeta = 0.5\n").unwrap();
        assert_eq!(c.topology, TopologySource::Generator { kind: TopologyKind::Ring { n: 10 }, seed: 0 });
        assert_eq!(c.run, RunSection::default());
        match c.experiment {
            Experiment::Epidemic(m) => {
                assert_eq!(m.params, EpidemicParams::si(0.5));
                assert_eq!(m.seeds, vec!["0"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_beta_names_field() {
        let err = parse("[topology]\ngenerator = ring 10\n[model]\nmodel = SI\nbeta = 1.5\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("beta"), "{err}");
    }

    #[test]
    fn exactly_one_experiment() {
        let both = "[topology]\ngenerator = ring 4\n[model]\nmodel = SI\n[scenario]\nkind = vertical\n";
        assert_eq!(parse(both).unwrap_err().exit_code(), 2);
        let none = "[topology]\ngenerator = ring 4\n";
        assert_eq!(parse(none).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(parse("[topology]\ngenerator = ring 4\n[model]\nmodel = SI\nbta = 0.1\n").is_err());
        assert!(parse("[topology]\ngenerator = ring 4\n[model]\nmodel = SI\n[extra]\n").is_err());
        assert!(parse("[topology]\ngenerator = ring 4\n[model]\nmodel = SI\n[demand]\n0,1,2\n").is_err());
    }

    #[test]
    fn topology_seed_defaults_to_rng_seed() {
        let c = parse("[topology]\ngenerator = ba 20 2\n[run]\nrng_seed = 17\n[model]\nmodel = SI\n").unwrap();
        assert_eq!(
            c.topology,
            TopologySource::Generator { kind: TopologyKind::BarabasiAlbert { n: 20, m: 2 }, seed: 17 }
        );
    }

    #[test]
    fn resolved_text_round_trips() {
        let text = "\
0 1
1 2
[roles]
0=edge
1=core
2=edge
[scenario]
kind = horizontal
[capacity]
1=10
[injection]
0,2,20
[run]
rng_seed = 9
";
        let c = parse(text).unwrap();
        let net = c.build_network().unwrap();
        let resolved = c.resolved_text(&net);
        assert!(resolved.contains("rng_seed = 9"));
        let again = parse(&resolved).unwrap();
        assert_eq!(again.resolved_text(&again.build_network().unwrap()), resolved);
    }

    #[test]
    fn output_formats() {
        let c = parse("[topology]\ngenerator = ring 4\n[model]\nmodel = SI\n[output]\nformats = csv\n").unwrap();
        assert!(c.output.csv && !c.output.json);
        assert!(parse("[topology]\ngenerator = ring 4\n[model]\nmodel = SI\n[output]\nformats = xml\n").is_err());
    }
}
