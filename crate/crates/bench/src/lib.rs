//! Fixtures shared by the criterion benches.

use std::collections::BTreeMap;

use failprop_core::{generate_topology, Demand, HorizontalScenario, Network, TopologyKind};

pub fn ba(n: usize, m: usize, seed: u64) -> Network {
    generate_topology(TopologyKind::BarabasiAlbert { n, m }, seed).expect("valid generator parameters")
}

/// `rows x cols` grid with unit capacity on interior nodes and one
/// corner-to-corner injection large enough to start a cascade.
pub fn grid_cascade(rows: usize, cols: usize) -> (Network, HorizontalScenario) {
    let net = generate_topology(TopologyKind::Grid { rows, cols }, 0).expect("valid grid");
    let last = rows * cols - 1;
    let node_capacity: BTreeMap<_, _> = (1..last).map(|v| (v, 10.0)).collect();
    let demands = (0..cols)
        .map(|c| Demand { src: c, dst: last - c, volume: 1.0 })
        .filter(|d| d.src != d.dst)
        .collect();
    let sc = HorizontalScenario {
        node_capacity,
        demands,
        injection: Some(Demand { src: 0, dst: last, volume: 12.0 }),
        misroute: false,
    };
    (net, sc)
}
