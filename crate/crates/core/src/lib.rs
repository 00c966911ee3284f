//! Simulation of failure propagation in layered transport networks.
//!
//! * [`topology`]: two-plane network graphs, edge-list I/O and generators
//! * [`epidemic`]: SI / SIS / SIR / SID stochastic dynamics and Monte Carlo
//! * [`vertical`]: controller overload through switch failover chains
//! * [`horizontal`]: data-plane capacity overflow with rerouting
//! * [`metrics`]: outbreak size, stabilization, connectivity, sweeps

pub mod cascade;
pub mod epidemic;
pub mod horizontal;
pub mod metrics;
pub mod rng;
pub mod sections;
pub mod topology;
pub mod vertical;

pub use cascade::{CascadeTrace, ScenarioError};
pub use epidemic::{
    infection_probability, monte_carlo, run, step, Aggregate, Counts, EngineError, EpidemicParams, Event, Model,
    NodeState, SimulationTrace, StateVector, StopReason, StopRule,
};
pub use horizontal::{compute_loads, route_demand, run_horizontal, Demand, HorizontalScenario, HorizontalTrace, LoadMap};
pub use metrics::{dp_connectivity, outbreak_size, stabilization_time, threshold_sweep, SweepResult, SweepSpec};
pub use topology::{generate_topology, load_edge_list, validate, Network, NodeId, NodeRole, TopologyError, TopologyKind};
pub use vertical::{assign_switches, run_vertical, Attack, VerticalScenario, VerticalTrace};
