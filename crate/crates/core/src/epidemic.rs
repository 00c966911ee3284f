//! Discrete-time stochastic SI, SIS, SIR and SID dynamics on a [`Network`].
//!
//! All nodes update synchronously from the tick-`t` states. Random draws
//! happen in a fixed order: first one uniform per node that can leave its
//! current state on its own (I nodes, and D nodes under SID), in ascending
//! node id; then one uniform per susceptible node with at least one
//! infected neighbor, again in ascending id.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metrics;
use crate::rng::{derive_seed, rng_from_seed};
use crate::topology::{Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Model {
    #[serde(rename = "SI")]
    Si,
    #[serde(rename = "SIS")]
    Sis,
    #[serde(rename = "SIR")]
    Sir,
    #[serde(rename = "SID")]
    Sid,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Si => "SI",
            Model::Sis => "SIS",
            Model::Sir => "SIR",
            Model::Sid => "SID",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SI" => Ok(Model::Si),
            "SIS" => Ok(Model::Sis),
            "SIR" => Ok(Model::Sir),
            "SID" => Ok(Model::Sid),
            other => Err(format!("unknown model `{other}` (expected SI, SIS, SIR or SID)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{field} must be a probability in [0, 1], got {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("tau + delta1 must not exceed 1 (tau={tau}, delta1={delta1})")]
    CompetingExits { tau: f64, delta1: f64 },
    #[error("{field} must be 0 under the {model} model, got {value}")]
    NotAllowed {
        field: &'static str,
        model: Model,
        value: f64,
    },
}

/// Transition probabilities per tick.
///
/// * `beta`: infection per infected neighbor
/// * `delta1`: I -> S repair (SIS, SID) or I -> R removal (SIR)
/// * `tau`: I -> D, the control-plane fault reaching the data plane (SID)
/// * `gamma`: D -> S repair (SID)
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpidemicParams {
    pub model: Model,
    pub beta: f64,
    pub delta1: f64,
    pub tau: f64,
    pub gamma: f64,
}

impl EpidemicParams {
    pub fn si(beta: f64) -> Self {
        EpidemicParams { model: Model::Si, beta, delta1: 0.0, tau: 0.0, gamma: 0.0 }
    }

    pub fn sis(beta: f64, delta1: f64) -> Self {
        EpidemicParams { model: Model::Sis, beta, delta1, tau: 0.0, gamma: 0.0 }
    }

    pub fn sir(beta: f64, delta1: f64) -> Self {
        EpidemicParams { model: Model::Sir, beta, delta1, tau: 0.0, gamma: 0.0 }
    }

    pub fn sid(beta: f64, delta1: f64, tau: f64, gamma: f64) -> Self {
        EpidemicParams { model: Model::Sid, beta, delta1, tau, gamma }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("beta", self.beta),
            ("delta1", self.delta1),
            ("tau", self.tau),
            ("gamma", self.gamma),
        ];
        for (field, value) in fields {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::OutOfRange { field, value });
            }
        }
        let must_be_zero: &[(&'static str, f64)] = match self.model {
            Model::Si => &fields[1..],
            Model::Sis | Model::Sir => &fields[2..],
            Model::Sid => &[],
        };
        for &(field, value) in must_be_zero {
            if value != 0.0 {
                return Err(ParamError::NotAllowed { field, model: self.model, value });
            }
        }
        if self.model == Model::Sid && self.tau + self.delta1 > 1.0 {
            return Err(ParamError::CompetingExits { tau: self.tau, delta1: self.delta1 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NodeState {
    S,
    I,
    R,
    D,
}

impl NodeState {
    pub fn letter(self) -> char {
        match self {
            NodeState::S => 'S',
            NodeState::I => 'I',
            NodeState::R => 'R',
            NodeState::D => 'D',
        }
    }

    fn legal_under(self, model: Model) -> bool {
        match self {
            NodeState::S | NodeState::I => true,
            NodeState::R => model == Model::Sir,
            NodeState::D => model == Model::Sid,
        }
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVector {
    pub states: Vec<NodeState>,
    pub tick: u64,
}

impl StateVector {
    pub fn all_susceptible(n: usize) -> Self {
        StateVector { states: vec![NodeState::S; n], tick: 0 }
    }

    /// Tick-0 vector with `seeds` infected.
    pub fn seeded(n: usize, seeds: &[NodeId]) -> Self {
        let mut sv = Self::all_susceptible(n);
        for &s in seeds {
            sv.states[s] = NodeState::I;
        }
        sv
    }

    pub fn counts(&self) -> Counts {
        Counts::of(&self.states)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "I")]
    pub i: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "D")]
    pub d: usize,
}

impl Counts {
    pub fn of(states: &[NodeState]) -> Self {
        let mut c = Counts::default();
        for st in states {
            match st {
                NodeState::S => c.s += 1,
                NodeState::I => c.i += 1,
                NodeState::R => c.r += 1,
                NodeState::D => c.d += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.s + self.i + self.r + self.d
    }

    pub fn get(&self, state: NodeState) -> usize {
        match state {
            NodeState::S => self.s,
            NodeState::I => self.i,
            NodeState::R => self.r,
            NodeState::D => self.d,
        }
    }
}

/// A node changed state; `tick` is the tick at which the new state holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Event {
    pub tick: u64,
    pub node: NodeId,
    pub from: NodeState,
    pub to: NodeState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopRule {
    /// Run exactly `max_ticks` steps.
    FixedTicks,
    /// Stop early once no node is I or D.
    Absorb,
}

impl FromStr for StopRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" | "fixed_ticks" => Ok(StopRule::FixedTicks),
            "absorb" => Ok(StopRule::Absorb),
            other => Err(format!("unknown stop rule `{other}` (expected fixed_ticks or absorb)")),
        }
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopRule::FixedTicks => "fixed_ticks",
            StopRule::Absorb => "absorb",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Absorbed,
    Horizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub node_count: usize,
    /// `counts[t]` holds the compartment sizes at tick `t`, starting at 0.
    pub counts: Vec<Counts>,
    /// Tick-0 seed infections are logged as `S -> I` at tick 0.
    pub events: Vec<Event>,
    pub final_state: StateVector,
    pub stop_reason: StopReason,
}

impl SimulationTrace {
    pub fn last_tick(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,S,I,R,D\n");
        for (t, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{t},{},{},{},{}\n", c.s, c.i, c.r, c.d));
        }
        out
    }

    pub fn events_csv(&self) -> String {
        let mut out = String::from("tick,node,from,to\n");
        for e in &self.events {
            out.push_str(&format!("{},{},{},{}\n", e.tick, e.node, e.from, e.to));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("state vector has {got} entries but the network has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("node {node} is in state {state}, which the {model} model cannot reach")]
    IllegalState {
        node: NodeId,
        state: NodeState,
        model: Model,
    },
    #[error("at least one seed node is required")]
    EmptySeeds,
    #[error("seed node {0} does not exist")]
    UnknownSeed(NodeId),
    #[error("max_ticks must be positive")]
    ZeroTicks,
    #[error("n_runs must be positive")]
    ZeroRuns,
}

/// Probability that a susceptible node with `k` infected neighbors becomes
/// infected, each neighbor transmitting independently with `beta`.
pub fn infection_probability(k: usize, beta: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let k = i32::try_from(k).unwrap_or(i32::MAX);
    1.0 - (1.0 - beta).powi(k)
}

fn check(net: &Network, states: &[NodeState], p: &EpidemicParams) -> Result<(), EngineError> {
    p.validate()?;
    if states.len() != net.node_count() {
        return Err(EngineError::LengthMismatch { expected: net.node_count(), got: states.len() });
    }
    if let Some((node, &state)) = states.iter().enumerate().find(|(_, s)| !s.legal_under(p.model)) {
        return Err(EngineError::IllegalState { node, state, model: p.model });
    }
    Ok(())
}

/// One synchronous update of `current` into `next`. Inputs must already be
/// checked.
fn advance<R: Rng + ?Sized>(
    net: &Network,
    current: &[NodeState],
    p: &EpidemicParams,
    rng: &mut R,
    next: &mut Vec<NodeState>,
) {
    next.clear();
    next.extend_from_slice(current);
    for (v, &state) in current.iter().enumerate() {
        match (state, p.model) {
            (NodeState::I, Model::Si) => {}
            (NodeState::I, Model::Sis) => {
                if rng.random::<f64>() < p.delta1 {
                    next[v] = NodeState::S;
                }
            }
            (NodeState::I, Model::Sir) => {
                if rng.random::<f64>() < p.delta1 {
                    next[v] = NodeState::R;
                }
            }
            (NodeState::I, Model::Sid) => {
                let u = rng.random::<f64>();
                if u < p.tau {
                    next[v] = NodeState::D;
                } else if u < p.tau + p.delta1 {
                    next[v] = NodeState::S;
                }
            }
            (NodeState::D, Model::Sid) if rng.random::<f64>() < p.gamma => next[v] = NodeState::S,
            _ => {}
        }
    }
    for (v, &state) in current.iter().enumerate() {
        if state != NodeState::S {
            continue;
        }
        let k = net
            .adj(v)
            .iter()
            .filter(|&&w| current[w] == NodeState::I)
            .count();
        if k > 0 && rng.random::<f64>() < infection_probability(k, p.beta) {
            next[v] = NodeState::I;
        }
    }
}

/// Advances `sv` by one tick.
pub fn step<R: Rng + ?Sized>(
    net: &Network,
    sv: &StateVector,
    p: &EpidemicParams,
    rng: &mut R,
) -> Result<StateVector, EngineError> {
    check(net, &sv.states, p)?;
    let mut next = Vec::with_capacity(sv.states.len());
    advance(net, &sv.states, p, rng, &mut next);
    Ok(StateVector { states: next, tick: sv.tick + 1 })
}

/// Runs one replica from `seeds` until `max_ticks` or, with
/// [`StopRule::Absorb`], until no node is I or D.
pub fn run(
    net: &Network,
    seeds: &[NodeId],
    p: &EpidemicParams,
    max_ticks: u64,
    stop: StopRule,
    rng_seed: u64,
) -> Result<SimulationTrace, EngineError> {
    check_run_inputs(net, seeds, p, max_ticks)?;
    Ok(run_unchecked(net, seeds, p, max_ticks, stop, rng_seed))
}

fn check_run_inputs(
    net: &Network,
    seeds: &[NodeId],
    p: &EpidemicParams,
    max_ticks: u64,
) -> Result<(), EngineError> {
    p.validate()?;
    if seeds.is_empty() {
        return Err(EngineError::EmptySeeds);
    }
    if let Some(&s) = seeds.iter().find(|&&s| s >= net.node_count()) {
        return Err(EngineError::UnknownSeed(s));
    }
    if max_ticks == 0 {
        return Err(EngineError::ZeroTicks);
    }
    Ok(())
}

fn run_unchecked(
    net: &Network,
    seeds: &[NodeId],
    p: &EpidemicParams,
    max_ticks: u64,
    stop: StopRule,
    rng_seed: u64,
) -> SimulationTrace {
    let mut rng = rng_from_seed(rng_seed);
    let n = net.node_count();
    let mut current = StateVector::seeded(n, seeds).states;
    let mut events: Vec<Event> = current
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == NodeState::I)
        .map(|(node, _)| Event { tick: 0, node, from: NodeState::S, to: NodeState::I })
        .collect();
    let mut counts = vec![Counts::of(&current)];
    let mut next = Vec::with_capacity(n);
    let absorbed = |c: &Counts| c.i == 0 && c.d == 0;
    let mut tick = 0;
    while tick < max_ticks && !(stop == StopRule::Absorb && absorbed(counts.last().unwrap())) {
        advance(net, &current, p, &mut rng, &mut next);
        tick += 1;
        for (node, (&from, &to)) in current.iter().zip(next.iter()).enumerate() {
            if from != to {
                events.push(Event { tick, node, from, to });
            }
        }
        std::mem::swap(&mut current, &mut next);
        counts.push(Counts::of(&current));
    }
    let stop_reason = if absorbed(counts.last().unwrap()) {
        StopReason::Absorbed
    } else {
        StopReason::Horizon
    };
    SimulationTrace {
        node_count: n,
        counts,
        events,
        final_state: StateVector { states: current, tick },
        stop_reason,
    }
}

/// Per-tick statistics of one compartment across replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompartmentStats {
    pub mean: Vec<f64>,
    pub min: Vec<usize>,
    pub max: Vec<usize>,
}

/// Monte Carlo summary. Replicas that stop early keep their final counts
/// for the remaining ticks, so every per-tick array has length `ticks`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub n_runs: usize,
    pub node_count: usize,
    pub ticks: usize,
    #[serde(rename = "S")]
    pub s: CompartmentStats,
    #[serde(rename = "I")]
    pub i: CompartmentStats,
    #[serde(rename = "R")]
    pub r: CompartmentStats,
    #[serde(rename = "D")]
    pub d: CompartmentStats,
    /// Final outbreak fraction of each replica, by replica index.
    pub outbreak_sizes: Vec<f64>,
    pub mean_outbreak: f64,
    pub stderr_outbreak: f64,
    pub absorbed_runs: usize,
}

impl Aggregate {
    pub fn compartment(&self, state: NodeState) -> &CompartmentStats {
        match state {
            NodeState::S => &self.s,
            NodeState::I => &self.i,
            NodeState::R => &self.r,
            NodeState::D => &self.d,
        }
    }

    /// Mean fraction of nodes in `state`, averaged over ticks `from..=to`.
    pub fn mean_fraction(&self, state: NodeState, from: usize, to: usize) -> f64 {
        let window = &self.compartment(state).mean[from..=to];
        window.iter().sum::<f64>() / window.len() as f64 / self.node_count as f64
    }
}

/// Commutative, associative accumulator over replica results; integer sums
/// keep the result independent of merge order.
#[derive(Debug, Clone)]
struct Accumulator {
    runs: usize,
    sum: Vec<[u64; 4]>,
    min: Vec<[usize; 4]>,
    max: Vec<[usize; 4]>,
    infected_sum: u64,
    infected_sq_sum: u128,
    absorbed: usize,
    longest: usize,
}

impl Accumulator {
    fn empty(ticks: usize) -> Self {
        Accumulator {
            runs: 0,
            sum: vec![[0; 4]; ticks],
            min: vec![[usize::MAX; 4]; ticks],
            max: vec![[0; 4]; ticks],
            infected_sum: 0,
            infected_sq_sum: 0,
            absorbed: 0,
            longest: 0,
        }
    }

    fn add(&mut self, trace: &SimulationTrace, ever_infected: usize) {
        let last = *trace.counts.last().expect("trace has tick 0");
        for t in 0..self.sum.len() {
            let c = trace.counts.get(t).copied().unwrap_or(last);
            for (k, x) in [c.s, c.i, c.r, c.d].into_iter().enumerate() {
                self.sum[t][k] += x as u64;
                self.min[t][k] = self.min[t][k].min(x);
                self.max[t][k] = self.max[t][k].max(x);
            }
        }
        self.runs += 1;
        self.infected_sum += ever_infected as u64;
        self.infected_sq_sum += (ever_infected as u128).pow(2);
        self.absorbed += usize::from(trace.stop_reason == StopReason::Absorbed);
        self.longest = self.longest.max(trace.counts.len());
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        for t in 0..self.sum.len() {
            for k in 0..4 {
                self.sum[t][k] += other.sum[t][k];
                self.min[t][k] = self.min[t][k].min(other.min[t][k]);
                self.max[t][k] = self.max[t][k].max(other.max[t][k]);
            }
        }
        self.runs += other.runs;
        self.infected_sum += other.infected_sum;
        self.infected_sq_sum += other.infected_sq_sum;
        self.absorbed += other.absorbed;
        self.longest = self.longest.max(other.longest);
        self
    }
}

/// Runs `n_runs` replicas in parallel; replica `i` is seeded with
/// `derive_seed(base_seed, i)`. The result does not depend on how many
/// threads execute the replicas or in which order they finish.
pub fn monte_carlo(
    net: &Network,
    seeds: &[NodeId],
    p: &EpidemicParams,
    max_ticks: u64,
    stop: StopRule,
    n_runs: usize,
    base_seed: u64,
) -> Result<Aggregate, EngineError> {
    check_run_inputs(net, seeds, p, max_ticks)?;
    if n_runs == 0 {
        return Err(EngineError::ZeroRuns);
    }
    let ticks = max_ticks as usize + 1;
    let n = net.node_count();
    let per_run: Vec<(usize, Accumulator)> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let trace = run_unchecked(net, seeds, p, max_ticks, stop, derive_seed(base_seed, i as u64));
            let ever = metrics::ever_infected(&trace);
            let mut acc = Accumulator::empty(ticks);
            acc.add(&trace, ever);
            (ever, acc)
        })
        .collect();
    let outbreak_sizes = per_run.iter().map(|(ever, _)| *ever as f64 / n as f64).collect();
    let acc = per_run
        .into_iter()
        .map(|(_, acc)| acc)
        .fold(Accumulator::empty(ticks), Accumulator::merge);

    // Trim trailing ticks that no replica reached.
    let reached = acc.longest;
    let runs = acc.runs as f64;
    let stats = |k: usize| CompartmentStats {
        mean: acc.sum[..reached].iter().map(|s| s[k] as f64 / runs).collect(),
        min: acc.min[..reached].iter().map(|m| m[k]).collect(),
        max: acc.max[..reached].iter().map(|m| m[k]).collect(),
    };
    let nf = n as f64;
    let mean_count = acc.infected_sum as f64 / runs;
    let stderr = if acc.runs > 1 {
        let var = (acc.infected_sq_sum as f64 - runs * mean_count * mean_count) / (runs - 1.0);
        (var.max(0.0) / runs).sqrt() / nf
    } else {
        0.0
    };
    Ok(Aggregate {
        n_runs,
        node_count: n,
        ticks: reached,
        s: stats(0),
        i: stats(1),
        r: stats(2),
        d: stats(3),
        outbreak_sizes,
        mean_outbreak: mean_count / nf,
        stderr_outbreak: stderr,
        absorbed_runs: acc.absorbed,
    })
}
