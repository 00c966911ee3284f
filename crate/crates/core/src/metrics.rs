//! Quantities read off traces: outbreak size, stabilization time,
//! data-plane connectivity, threshold sweeps and cascade failure fractions.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::epidemic::{monte_carlo, EngineError, EpidemicParams, NodeState, SimulationTrace, StateVector, StopReason, StopRule};
use crate::horizontal::HorizontalTrace;
use crate::rng::derive_seed;
use crate::topology::{Network, NodeId};
use crate::vertical::VerticalTrace;

/// Number of distinct nodes that ever entered I.
pub fn ever_infected(trace: &SimulationTrace) -> usize {
    trace
        .events
        .iter()
        .filter(|e| e.to == NodeState::I)
        .map(|e| e.node)
        .collect::<BTreeSet<_>>()
        .len()
}

/// Fraction of nodes that were ever infected. D is only reachable through
/// I, so I-entries cover every node that failed in any way.
pub fn outbreak_size(trace: &SimulationTrace) -> f64 {
    ever_infected(trace) as f64 / trace.node_count as f64
}

/// Fraction of all nodes inside the largest connected component of the
/// subgraph whose data plane still works (every state except D).
pub fn dp_connectivity(net: &Network, sv: &StateVector) -> f64 {
    let largest = net
        .components(|v| sv.states[v] != NodeState::D)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    largest as f64 / net.node_count() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub tick: u64,
    pub stabilized: bool,
}

/// First tick from which compartment counts never change again. When the
/// counts still change at the final tick of a trace that hit its horizon,
/// the final tick is reported with `stabilized = false`.
pub fn stabilization_time(trace: &SimulationTrace) -> Stabilization {
    let last = trace.counts.len() - 1;
    let final_counts = trace.counts[last];
    let tick = trace
        .counts
        .iter()
        .rposition(|c| *c != final_counts)
        .map_or(0, |i| i + 1);
    let stabilized = tick < last || trace.stop_reason == StopReason::Absorbed || last == 0;
    Stabilization { tick: tick as u64, stabilized }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep grid must be strictly increasing (at position {0})")]
    NotIncreasing(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub mean_outbreak: f64,
    pub stderr: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Smallest grid value whose mean outbreak exceeds epsilon.
    pub threshold_estimate: Option<f64>,
    pub epsilon: f64,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,mean_outbreak,stderr,n_runs\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.param, p.mean_outbreak, p.stderr, p.n_runs));
        }
        out
    }

    pub fn threshold_line(&self) -> String {
        match self.threshold_estimate {
            Some(v) => format!("threshold_estimate={v}"),
            None => "threshold_estimate=none".to_string(),
        }
    }
}

/// Inputs shared by every point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec<'a> {
    pub net: &'a Network,
    pub seeds: &'a [NodeId],
    /// Template whose `beta` is replaced by each grid value.
    pub params: EpidemicParams,
    pub grid: &'a [f64],
    pub n_runs: usize,
    pub max_ticks: u64,
    pub stop: StopRule,
    pub epsilon: f64,
    pub base_seed: u64,
}

/// Monte Carlo outbreak size over a grid of `beta` values. Grid point `j`
/// uses root seed `derive_seed(base_seed, j)`.
pub fn threshold_sweep(spec: &SweepSpec<'_>) -> Result<SweepResult, SweepError> {
    if spec.grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    if let Some(i) = spec.grid.windows(2).position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(SweepError::NotIncreasing(i + 1));
    }
    if !(spec.epsilon > 0.0 && spec.epsilon < 1.0) {
        return Err(SweepError::BadEpsilon(spec.epsilon));
    }
    let points = spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(j, &beta)| {
            let params = EpidemicParams { beta, ..spec.params };
            let agg = monte_carlo(
                spec.net,
                spec.seeds,
                &params,
                spec.max_ticks,
                spec.stop,
                spec.n_runs,
                derive_seed(spec.base_seed, j as u64),
            )?;
            Ok(SweepPoint {
                param: beta,
                mean_outbreak: agg.mean_outbreak,
                stderr: agg.stderr_outbreak,
                n_runs: spec.n_runs,
            })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    let threshold_estimate = points.iter().find(|p| p.mean_outbreak > spec.epsilon).map(|p| p.param);
    Ok(SweepResult { points, threshold_estimate, epsilon: spec.epsilon })
}

/// (failed controllers + orphaned switches) / node count at the fixed point.
pub fn vertical_failed_fraction(net: &Network, trace: &VerticalTrace) -> f64 {
    let t = trace.terminal();
    let failed = t.failed_controllers().len() + t.assignment.orphaned().count();
    failed as f64 / net.node_count() as f64
}

/// Failed nodes / node count at the fixed point.
pub fn horizontal_failed_fraction(net: &Network, trace: &HorizontalTrace) -> f64 {
    trace.terminal().failed().len() as f64 / net.node_count() as f64
}
