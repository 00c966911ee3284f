//! Horizontal data-plane propagation: injected traffic overloads core
//! switches, and their failure reroutes traffic onto further switches.
//!
//! Each demand follows one hop-count shortest path through live
//! non-controller nodes and adds its volume to every node on that path,
//! endpoints included. Nodes whose load exceeds their capacity fail
//! together at the end of a round; the next round reroutes everything over
//! the survivors. The cascade stops at the first round without failures.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::cascade::{check_capacity, check_value, fmt_capacity, node_value, parse_number, resolve, CascadeTrace, ScenarioError};
use crate::sections::{self, Section};
use crate::topology::{Network, NodeId, NodeRole};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub src: NodeId,
    pub dst: NodeId,
    pub volume: f64,
}

/// How equal-length shortest paths are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lexicographically smallest node-id sequence.
    #[default]
    Smallest,
    /// Lexicographically largest; models a controller routing bug.
    Largest,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HorizontalScenario {
    /// Nodes without an entry have unbounded capacity.
    pub node_capacity: BTreeMap<NodeId, f64>,
    pub demands: Vec<Demand>,
    /// Attack flow entering at one edge switch and leaving at another.
    pub injection: Option<Demand>,
    pub misroute: bool,
}

/// Identifies a demand in traces: a baseline demand by index, or the
/// injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DemandId {
    Baseline(usize),
    Injection,
}

impl std::fmt::Display for DemandId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DemandId::Baseline(i) => write!(f, "demand{i}"),
            DemandId::Injection => f.write_str("injection"),
        }
    }
}

impl HorizontalScenario {
    pub fn tie_break(&self) -> TieBreak {
        if self.misroute {
            TieBreak::Largest
        } else {
            TieBreak::Smallest
        }
    }

    pub fn capacity(&self, v: NodeId) -> f64 {
        self.node_capacity.get(&v).copied().unwrap_or(f64::INFINITY)
    }

    /// Baseline demands in order, then the injection.
    pub fn all_demands(&self) -> impl Iterator<Item = (DemandId, Demand)> + '_ {
        self.demands
            .iter()
            .enumerate()
            .map(|(i, d)| (DemandId::Baseline(i), *d))
            .chain(self.injection.map(|d| (DemandId::Injection, d)))
    }

    /// Checks the scenario against `net`. Returns soft warnings, such as
    /// injection endpoints that are not edge switches.
    pub fn validate(&self, net: &Network) -> Result<Vec<String>, ScenarioError> {
        let exists = |v: NodeId| {
            if v < net.node_count() {
                Ok(())
            } else {
                Err(ScenarioError::MissingNode(v))
            }
        };
        let not_controller = |v: NodeId, what: &str| {
            if net.role(v) == NodeRole::Controller {
                Err(ScenarioError::Role { node: v, message: format!("controllers cannot carry {what}") })
            } else {
                Ok(())
            }
        };
        for (&v, &cap) in &self.node_capacity {
            exists(v)?;
            not_controller(v, "data-plane capacity")?;
            check_capacity(v, cap)?;
        }
        for (i, (id, d)) in self.all_demands().enumerate() {
            exists(d.src)?;
            exists(d.dst)?;
            not_controller(d.src, "traffic")?;
            not_controller(d.dst, "traffic")?;
            if d.src == d.dst {
                return Err(ScenarioError::LoopDemand { index: i, node: d.src });
            }
            check_value(if id == DemandId::Injection { "injection volume" } else { "demand volume" }, d.src, d.volume)?;
        }
        let mut warnings = Vec::new();
        if let Some(inj) = self.injection {
            for v in [inj.src, inj.dst] {
                if net.role(v) != NodeRole::EdgeSwitch {
                    warnings.push(format!("injection endpoint {} is not an edge switch", net.label(v)));
                }
            }
        }
        Ok(warnings)
    }

    /// Reads `[capacity] node=value`, `[demand] src,dst,volume`,
    /// `[injection] entry,exit,volume` and an optional `[scenario]` section
    /// with `misroute=true`.
    pub fn parse(text: &str, net: &Network) -> Result<Self, ScenarioError> {
        let secs = sections::parse(text);
        if let Some(s) = secs
            .iter()
            .find(|s| !matches!(s.name.as_deref(), Some("capacity" | "demand" | "injection" | "scenario")))
        {
            let line = s.lines.first().map(|l| l.number).unwrap_or(s.header_line);
            return Err(ScenarioError::Parse {
                line,
                message: "expected a [capacity], [demand], [injection] or [scenario] section".into(),
            });
        }
        Self::from_sections(&secs, net)
    }

    pub fn from_sections(secs: &[Section], net: &Network) -> Result<Self, ScenarioError> {
        let mut sc = HorizontalScenario::default();
        for s in secs {
            for line in &s.lines {
                match s.name.as_deref() {
                    Some("capacity") => {
                        let (id, v) = node_value(net, line)?;
                        sc.node_capacity.insert(id, v);
                    }
                    Some("demand") => sc.demands.push(parse_demand(net, &line.text, line.number)?),
                    Some("injection") => {
                        if sc.injection.is_some() {
                            return Err(ScenarioError::Parse {
                                line: line.number,
                                message: "only one injection is supported".into(),
                            });
                        }
                        sc.injection = Some(parse_demand(net, &line.text, line.number)?);
                    }
                    Some("scenario") => {
                        if let Some(("misroute", v)) = sections::key_value(&line.text) {
                            sc.misroute = v.parse().map_err(|_| ScenarioError::Parse {
                                line: line.number,
                                message: format!("misroute must be true or false, got `{v}`"),
                            })?;
                        }
                    }
                    _ => {}
                }
            }
        }
        sc.validate(net)?;
        Ok(sc)
    }
}

fn parse_demand(net: &Network, text: &str, line: usize) -> Result<Demand, ScenarioError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(ScenarioError::Parse { line, message: format!("expected `src,dst,volume`, got `{text}`") });
    }
    Ok(Demand {
        src: resolve(net, parts[0], line)?,
        dst: resolve(net, parts[1], line)?,
        volume: parse_number(parts[2], line)?,
    })
}

/// Shortest path by hop count from `src` to `dst` through nodes marked in
/// `alive`, skipping controllers. Ties resolve lexicographically per
/// `tie`. Returns `None` when `dst` is unreachable or either end is dead.
pub fn route_demand(
    net: &Network,
    alive: &[bool],
    src: NodeId,
    dst: NodeId,
    tie: TieBreak,
) -> Option<Vec<NodeId>> {
    let usable = |v: NodeId| alive[v] && net.role(v) != NodeRole::Controller;
    if !usable(src) || !usable(dst) {
        return None;
    }
    // Distances to dst; walking downhill from src then yields exactly the
    // shortest paths, and a greedy choice at each hop is lexicographic.
    let mut dist = vec![usize::MAX; net.node_count()];
    dist[dst] = 0;
    let mut queue = VecDeque::from([dst]);
    while let Some(u) = queue.pop_front() {
        if u == src {
            break;
        }
        for &w in net.adj(u) {
            if dist[w] == usize::MAX && usable(w) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    if dist[src] == usize::MAX {
        return None;
    }
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        let mut downhill = net.adj(cur).iter().copied().filter(|&w| dist[w] == dist[cur] - 1);
        let next = match tie {
            TieBreak::Smallest => downhill.next(),
            TieBreak::Largest => downhill.next_back(),
        }
        .expect("a node at distance d > 0 has a neighbor at d - 1");
        path.push(next);
        cur = next;
    }
    Some(path)
}

/// Per-node routed volume.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadMap {
    pub load: Vec<f64>,
}

impl LoadMap {
    pub fn get(&self, v: NodeId) -> f64 {
        self.load[v]
    }

    pub fn total(&self) -> f64 {
        self.load.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedDemand {
    pub id: DemandId,
    pub demand: Demand,
    /// `None` when the demand was dropped.
    pub path: Option<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Routing {
    pub loads: LoadMap,
    pub demands: Vec<RoutedDemand>,
}

impl Routing {
    pub fn dropped(&self) -> impl Iterator<Item = &RoutedDemand> {
        self.demands.iter().filter(|d| d.path.is_none())
    }
}

/// Routes every demand (the injection last) over `alive` nodes and sums
/// the resulting loads. Unreachable demands contribute nothing and are
/// marked dropped.
pub fn compute_loads(net: &Network, alive: &[bool], sc: &HorizontalScenario) -> Routing {
    let mut load = vec![0.0; net.node_count()];
    let tie = sc.tie_break();
    let demands = sc
        .all_demands()
        .map(|(id, d)| {
            let path = route_demand(net, alive, d.src, d.dst, tie);
            for &v in path.iter().flatten() {
                load[v] += d.volume;
            }
            RoutedDemand { id, demand: d, path }
        })
        .collect();
    Routing { loads: LoadMap { load }, demands }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalRound {
    /// 1-based round number.
    pub round: usize,
    /// Nodes already failed when the round started.
    pub failed_before: BTreeSet<NodeId>,
    pub routing: Routing,
    pub newly_failed: BTreeSet<NodeId>,
}

impl HorizontalRound {
    pub fn failed(&self) -> BTreeSet<NodeId> {
        self.failed_before.union(&self.newly_failed).copied().collect()
    }
}

pub type HorizontalTrace = CascadeTrace<HorizontalRound>;

/// Runs the capacity-overflow cascade until a round produces no failure.
pub fn run_horizontal(net: &Network, sc: &HorizontalScenario) -> Result<HorizontalTrace, ScenarioError> {
    sc.validate(net)?;
    let mut alive: Vec<bool> = (0..net.node_count())
        .map(|v| net.role(v) != NodeRole::Controller)
        .collect();
    let mut failed = BTreeSet::new();
    let mut rounds = Vec::new();
    loop {
        let routing = compute_loads(net, &alive, sc);
        let newly_failed: BTreeSet<NodeId> = (0..net.node_count())
            .filter(|&v| alive[v] && routing.loads.get(v) > sc.capacity(v))
            .collect();
        let done = newly_failed.is_empty();
        rounds.push(HorizontalRound {
            round: rounds.len() + 1,
            failed_before: failed.clone(),
            routing,
            newly_failed: newly_failed.clone(),
        });
        if done {
            break;
        }
        for &v in &newly_failed {
            alive[v] = false;
        }
        failed.extend(newly_failed);
    }
    Ok(CascadeTrace { rounds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizontalSummary {
    pub rounds: usize,
    pub failed_nodes: Vec<String>,
    pub dropped_demands: Vec<String>,
    pub node_count: usize,
    pub failed_fraction: f64,
}

impl HorizontalTrace {
    /// `round,node,load,capacity,status` rows for every data-plane node.
    /// Status is `ok`, `failed` (in this round) or `down` (earlier).
    pub fn to_csv(&self, net: &Network, sc: &HorizontalScenario) -> String {
        let mut out = String::from("round,node,load,capacity,status\n");
        for r in &self.rounds {
            for v in (0..net.node_count()).filter(|&v| net.role(v) != NodeRole::Controller) {
                let status = if r.failed_before.contains(&v) {
                    "down"
                } else if r.newly_failed.contains(&v) {
                    "failed"
                } else {
                    "ok"
                };
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.round,
                    net.label(v),
                    r.routing.loads.get(v),
                    fmt_capacity(sc.capacity(v)),
                    status
                ));
            }
        }
        out
    }

    /// `round,demand,src,dst,volume` for every demand dropped in a round.
    pub fn dropped_csv(&self, net: &Network) -> String {
        let mut out = String::from("round,demand,src,dst,volume\n");
        for r in &self.rounds {
            for d in r.routing.dropped() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.round,
                    d.id,
                    net.label(d.demand.src),
                    net.label(d.demand.dst),
                    d.demand.volume
                ));
            }
        }
        out
    }

    pub fn summary(&self, net: &Network) -> HorizontalSummary {
        let t = self.terminal();
        HorizontalSummary {
            rounds: self.round_count(),
            failed_nodes: t.failed().iter().map(|&v| net.label(v)).collect(),
            dropped_demands: t.routing.dropped().map(|d| d.id.to_string()).collect(),
            node_count: net.node_count(),
            failed_fraction: crate::metrics::horizontal_failed_fraction(net, self),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_topology, load_edge_list, TopologyKind};

    fn all_alive(net: &Network) -> Vec<bool> {
        vec![true; net.node_count()]
    }

    #[test]
    fn routing_examples() {
        let path = Network::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(route_demand(&path, &all_alive(&path), 0, 2, TieBreak::Smallest), Some(vec![0, 1, 2]));
        let ring = generate_topology(TopologyKind::Ring { n: 4 }, 0).unwrap();
        let mut alive = all_alive(&ring);
        assert_eq!(route_demand(&ring, &alive, 0, 2, TieBreak::Smallest), Some(vec![0, 1, 2]));
        assert_eq!(route_demand(&ring, &alive, 0, 2, TieBreak::Largest), Some(vec![0, 3, 2]));
        alive[1] = false;
        assert_eq!(route_demand(&ring, &alive, 0, 2, TieBreak::Smallest), Some(vec![0, 3, 2]));
        alive[3] = false;
        assert_eq!(route_demand(&ring, &alive, 0, 2, TieBreak::Smallest), None);
        alive[0] = false;
        assert_eq!(route_demand(&ring, &alive, 0, 2, TieBreak::Smallest), None);
    }

    #[test]
    fn routing_avoids_controllers() {
        let net = load_edge_list("0 1\n1 2\n0 3\n3 4\n4 2\n[roles]\n1=controller\n").unwrap();
        let p = route_demand(&net, &all_alive(&net), 0, 2, TieBreak::Smallest);
        assert_eq!(p, Some(vec![0, 3, 4, 2]));
    }

    #[test]
    fn single_demand_loads_whole_path() {
        let net = Network::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let sc = HorizontalScenario {
            demands: vec![Demand { src: 0, dst: 2, volume: 5.0 }],
            ..Default::default()
        };
        let r = compute_loads(&net, &all_alive(&net), &sc);
        assert_eq!(r.loads.load, vec![5.0, 5.0, 5.0]);
        let empty = compute_loads(&net, &all_alive(&net), &HorizontalScenario::default());
        assert_eq!(empty.loads.load, vec![0.0; 3]);
    }

    #[test]
    fn crossing_demands_add_up() {
        // Star around node 1: 0-1-2 and 3-1-4.
        let net = Network::from_edges(5, [(0, 1), (1, 2), (3, 1), (1, 4)]).unwrap();
        let sc = HorizontalScenario {
            demands: vec![
                Demand { src: 0, dst: 2, volume: 3.0 },
                Demand { src: 3, dst: 4, volume: 4.0 },
            ],
            ..Default::default()
        };
        let r = compute_loads(&net, &all_alive(&net), &sc);
        assert_eq!(r.loads.get(1), 7.0);
        assert_eq!(r.loads.load, vec![3.0, 7.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn unbounded_capacity_single_round() {
        let net = generate_topology(TopologyKind::Ring { n: 6 }, 0).unwrap();
        let sc = HorizontalScenario {
            demands: vec![Demand { src: 0, dst: 3, volume: 1e9 }],
            ..Default::default()
        };
        let t = run_horizontal(&net, &sc).unwrap();
        assert_eq!(t.round_count(), 1);
        assert!(t.terminal().failed().is_empty());
    }

    #[test]
    fn misroute_flag_picks_other_tie() {
        let net = generate_topology(TopologyKind::Ring { n: 4 }, 0).unwrap();
        let mut sc = HorizontalScenario {
            node_capacity: BTreeMap::from([(1, 1.0), (3, 1.0)]),
            injection: Some(Demand { src: 0, dst: 2, volume: 2.0 }),
            ..Default::default()
        };
        assert_eq!(run_horizontal(&net, &sc).unwrap().rounds[0].newly_failed, BTreeSet::from([1]));
        sc.misroute = true;
        assert_eq!(run_horizontal(&net, &sc).unwrap().rounds[0].newly_failed, BTreeSet::from([3]));
    }

    #[test]
    fn validation_errors_and_warnings() {
        let net = load_edge_list("0 1\n1 2\n[roles]\n0=edge\n1=core\n2=core\n").unwrap();
        let loop_demand = HorizontalScenario {
            demands: vec![Demand { src: 1, dst: 1, volume: 1.0 }],
            ..Default::default()
        };
        assert!(matches!(loop_demand.validate(&net), Err(ScenarioError::LoopDemand { .. })));
        let negative = HorizontalScenario { node_capacity: BTreeMap::from([(1, -2.0)]), ..Default::default() };
        assert!(matches!(negative.validate(&net), Err(ScenarioError::BadValue { .. })));
        let inj = HorizontalScenario {
            injection: Some(Demand { src: 0, dst: 2, volume: 1.0 }),
            ..Default::default()
        };
        assert_eq!(inj.validate(&net).unwrap(), vec!["injection endpoint 2 is not an edge switch".to_string()]);
    }

    #[test]
    fn parse_scenario_file() {
        let net = generate_topology(TopologyKind::Ring { n: 5 }, 0).unwrap();
        let sc = HorizontalScenario::parse(
            "[capacity]\n1=10\n2=inf\n[demand]\n0,2,3\n1, 3, 4.5\n[injection]\n0,3,20\n[scenario]\nmisroute=true\n",
            &net,
        )
        .unwrap();
        assert_eq!(sc.capacity(1), 10.0);
        assert_eq!(sc.capacity(2), f64::INFINITY);
        assert_eq!(sc.capacity(4), f64::INFINITY);
        assert_eq!(sc.demands.len(), 2);
        assert_eq!(sc.demands[1], Demand { src: 1, dst: 3, volume: 4.5 });
        assert_eq!(sc.injection, Some(Demand { src: 0, dst: 3, volume: 20.0 }));
        assert!(sc.misroute);
        assert!(matches!(
            HorizontalScenario::parse("[demand]\n0,2\n", &net),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
    }
}
