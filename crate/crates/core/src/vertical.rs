//! Vertical propagation: switch request load overwhelms SDN controllers.
//!
//! Each switch sends its request rate to the first live controller in its
//! preference list. Every round, all controllers whose load exceeds their
//! capacity fail together and their switches fail over to the next
//! preference. A switch whose list is exhausted is orphaned. The failed set
//! only grows, so the iteration reaches a fixed point after at most
//! `controllers + 1` rounds.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cascade::{check_capacity, check_value, fmt_capacity, node_value, CascadeTrace, ScenarioError};
use crate::sections::{self, Section};
use crate::topology::{Network, NodeId, NodeRole};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attack {
    pub target: NodeId,
    /// Extra requests per tick added to the target switch.
    pub rate: f64,
}

/// Controllers without a capacity entry are unbounded; switches without a
/// rate send nothing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerticalScenario {
    pub controller_capacity: BTreeMap<NodeId, f64>,
    pub base_rate: BTreeMap<NodeId, f64>,
    pub attack: Option<Attack>,
}

impl VerticalScenario {
    pub fn validate(&self, net: &Network) -> Result<(), ScenarioError> {
        if net.controllers().next().is_none() {
            return Err(ScenarioError::NoControllers);
        }
        let exists = |v: NodeId| {
            if v < net.node_count() {
                Ok(())
            } else {
                Err(ScenarioError::MissingNode(v))
            }
        };
        for (&c, &cap) in &self.controller_capacity {
            exists(c)?;
            if net.role(c) != NodeRole::Controller {
                return Err(ScenarioError::Role { node: c, message: "capacity given for a non-controller".into() });
            }
            check_capacity(c, cap)?;
        }
        for (&s, &rate) in &self.base_rate {
            exists(s)?;
            if !net.role(s).is_switch() {
                return Err(ScenarioError::Role { node: s, message: "request rate given for a non-switch".into() });
            }
            check_value("rate", s, rate)?;
        }
        if let Some(a) = self.attack {
            exists(a.target)?;
            if !net.role(a.target).is_switch() {
                return Err(ScenarioError::Role { node: a.target, message: "attack target is not a switch".into() });
            }
            check_value("attack rate", a.target, a.rate)?;
        }
        Ok(())
    }

    pub fn capacity(&self, controller: NodeId) -> f64 {
        self.controller_capacity.get(&controller).copied().unwrap_or(f64::INFINITY)
    }

    /// Base rate plus the attack rate when `switch` is the target.
    pub fn effective_rate(&self, switch: NodeId) -> f64 {
        let base = self.base_rate.get(&switch).copied().unwrap_or(0.0);
        match self.attack {
            Some(a) if a.target == switch => base + a.rate,
            _ => base,
        }
    }

    /// Reads `[capacity] ctrl=value`, `[rate] switch=value` and
    /// `[attack] switch=value` sections. Node tokens may be ids or aliases.
    pub fn parse(text: &str, net: &Network) -> Result<Self, ScenarioError> {
        let secs = sections::parse(text);
        if let Some(s) = secs.iter().find(|s| !matches!(s.name.as_deref(), Some("capacity" | "rate" | "attack"))) {
            let line = s.lines.first().map(|l| l.number).unwrap_or(s.header_line);
            return Err(ScenarioError::Parse {
                line,
                message: "expected a [capacity], [rate] or [attack] section".into(),
            });
        }
        Self::from_sections(&secs, net)
    }

    /// Like [`VerticalScenario::parse`] but ignores unrelated sections.
    pub fn from_sections(secs: &[Section], net: &Network) -> Result<Self, ScenarioError> {
        let mut sc = VerticalScenario::default();
        for s in secs {
            for line in &s.lines {
                match s.name.as_deref() {
                    Some("capacity") => {
                        let (id, v) = node_value(net, line)?;
                        sc.controller_capacity.insert(id, v);
                    }
                    Some("rate") => {
                        let (id, v) = node_value(net, line)?;
                        sc.base_rate.insert(id, v);
                    }
                    Some("attack") => {
                        if sc.attack.is_some() {
                            return Err(ScenarioError::Parse {
                                line: line.number,
                                message: "only one attack line is supported".into(),
                            });
                        }
                        let (target, rate) = node_value(net, line)?;
                        sc.attack = Some(Attack { target, rate });
                    }
                    _ => {}
                }
            }
        }
        sc.validate(net)?;
        Ok(sc)
    }
}

/// Switch to controller mapping; `None` marks an orphaned switch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub controller_of: BTreeMap<NodeId, Option<NodeId>>,
    /// Switches orphaned because their preference list is empty.
    pub unassigned: Vec<NodeId>,
}

impl Assignment {
    pub fn orphaned(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.controller_of
            .iter()
            .filter(|(_, c)| c.is_none())
            .map(|(s, _)| *s)
    }
}

/// Maps every switch to the first controller in its preference list that is
/// not in `failed`.
pub fn assign_switches(net: &Network, failed: &BTreeSet<NodeId>) -> Assignment {
    let mut out = Assignment::default();
    for s in net.switches() {
        let prefs = net.prefs_of(s);
        if prefs.is_empty() {
            out.unassigned.push(s);
        }
        let ctrl = prefs.iter().copied().find(|c| !failed.contains(c));
        out.controller_of.insert(s, ctrl);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalRound {
    /// 1-based round number.
    pub round: usize,
    /// Controllers already failed when the round started.
    pub failed_before: BTreeSet<NodeId>,
    pub assignment: Assignment,
    /// Load on every live controller.
    pub load: BTreeMap<NodeId, f64>,
    pub newly_failed: BTreeSet<NodeId>,
}

impl VerticalRound {
    pub fn failed_controllers(&self) -> BTreeSet<NodeId> {
        self.failed_before.union(&self.newly_failed).copied().collect()
    }
}

pub type VerticalTrace = CascadeTrace<VerticalRound>;

/// Runs the controller-overload cascade to its fixed point.
pub fn run_vertical(net: &Network, sc: &VerticalScenario) -> Result<VerticalTrace, ScenarioError> {
    sc.validate(net)?;
    let controllers: Vec<NodeId> = net.controllers().collect();
    let mut failed = BTreeSet::new();
    let mut rounds = Vec::new();
    loop {
        let assignment = assign_switches(net, &failed);
        let mut load: BTreeMap<NodeId, f64> = controllers
            .iter()
            .filter(|c| !failed.contains(*c))
            .map(|&c| (c, 0.0))
            .collect();
        for (&s, ctrl) in &assignment.controller_of {
            if let Some(c) = ctrl {
                *load.get_mut(c).expect("assigned controllers are live") += sc.effective_rate(s);
            }
        }
        let newly_failed: BTreeSet<NodeId> = load
            .iter()
            .filter(|(c, l)| **l > sc.capacity(**c))
            .map(|(c, _)| *c)
            .collect();
        let done = newly_failed.is_empty();
        rounds.push(VerticalRound {
            round: rounds.len() + 1,
            failed_before: failed.clone(),
            assignment,
            load,
            newly_failed: newly_failed.clone(),
        });
        if done {
            break;
        }
        failed.extend(newly_failed);
    }
    Ok(CascadeTrace { rounds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerticalSummary {
    pub rounds: usize,
    pub failed_controllers: Vec<String>,
    pub orphaned_switches: Vec<String>,
    pub unassigned_switches: Vec<String>,
    pub live_controllers: usize,
    pub node_count: usize,
    pub failed_fraction: f64,
}

impl VerticalTrace {
    /// `round,controller,load,capacity,status` rows. Status is `ok`,
    /// `failed` (in this round) or `down` (earlier).
    pub fn to_csv(&self, net: &Network, sc: &VerticalScenario) -> String {
        let mut out = String::from("round,controller,load,capacity,status\n");
        for r in &self.rounds {
            for c in net.controllers() {
                let cap = fmt_capacity(sc.capacity(c));
                let (load, status) = if r.failed_before.contains(&c) {
                    (0.0, "down")
                } else if r.newly_failed.contains(&c) {
                    (r.load[&c], "failed")
                } else {
                    (r.load[&c], "ok")
                };
                out.push_str(&format!("{},{},{},{},{}\n", r.round, net.label(c), load, cap, status));
            }
        }
        out
    }

    pub fn summary(&self, net: &Network) -> VerticalSummary {
        let t = self.terminal();
        let failed = t.failed_controllers();
        VerticalSummary {
            rounds: self.round_count(),
            failed_controllers: failed.iter().map(|&c| net.label(c)).collect(),
            orphaned_switches: t.assignment.orphaned().map(|s| net.label(s)).collect(),
            unassigned_switches: t.assignment.unassigned.iter().map(|&s| net.label(s)).collect(),
            live_controllers: net.controllers().count() - failed.len(),
            node_count: net.node_count(),
            failed_fraction: crate::metrics::vertical_failed_fraction(net, self),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::load_edge_list;

    /// Switches 0..n_switches, then controllers; prefs given per switch.
    fn sdn(n_switches: usize, n_ctrl: usize, prefs: &[Vec<usize>]) -> Network {
        let mut text = String::from("[nodes]\n");
        text.push_str(&format!("count={}\n[roles]\n", n_switches + n_ctrl));
        for s in 0..n_switches {
            text.push_str(&format!("{s}=edge\n"));
        }
        for c in 0..n_ctrl {
            text.push_str(&format!("{}=controller\n", n_switches + c));
        }
        text.push_str("[controllers]\n");
        for (s, p) in prefs.iter().enumerate() {
            let list: Vec<String> = p.iter().map(|c| (n_switches + c).to_string()).collect();
            text.push_str(&format!("{s}:{}\n", list.join(",")));
        }
        load_edge_list(&text).unwrap()
    }

    #[test]
    fn assignment_failover_and_orphaning() {
        let net = sdn(1, 2, &[vec![0, 1]]);
        let (a, b) = (1, 2);
        assert_eq!(assign_switches(&net, &BTreeSet::new()).controller_of[&0], Some(a));
        assert_eq!(assign_switches(&net, &BTreeSet::from([a])).controller_of[&0], Some(b));
        assert_eq!(assign_switches(&net, &BTreeSet::from([a, b])).controller_of[&0], None);
    }

    #[test]
    fn empty_prefs_orphaned_with_warning() {
        let net = sdn(2, 1, &[vec![0], vec![]]);
        let a = assign_switches(&net, &BTreeSet::new());
        assert_eq!(a.controller_of[&1], None);
        assert_eq!(a.unassigned, vec![1]);
    }

    #[test]
    fn under_capacity_single_round() {
        let net = sdn(5, 1, &vec![vec![0]; 5]);
        let sc = VerticalScenario {
            controller_capacity: BTreeMap::from([(5, 100.0)]),
            base_rate: (0..5).map(|s| (s, 10.0)).collect(),
            attack: None,
        };
        let trace = run_vertical(&net, &sc).unwrap();
        assert_eq!(trace.round_count(), 1);
        assert_eq!(trace.terminal().load[&5], 50.0);
        assert!(trace.terminal().failed_controllers().is_empty());
    }

    #[test]
    fn load_equal_to_capacity_survives() {
        let net = sdn(2, 1, &vec![vec![0]; 2]);
        let sc = VerticalScenario {
            controller_capacity: BTreeMap::from([(2, 20.0)]),
            base_rate: (0..2).map(|s| (s, 10.0)).collect(),
            attack: None,
        };
        assert_eq!(run_vertical(&net, &sc).unwrap().round_count(), 1);
    }

    #[test]
    fn scenario_validation() {
        let net = sdn(2, 1, &vec![vec![0]; 2]);
        let bad_cap = VerticalScenario { controller_capacity: BTreeMap::from([(0, 1.0)]), ..Default::default() };
        assert!(matches!(bad_cap.validate(&net), Err(ScenarioError::Role { node: 0, .. })));
        let bad_rate = VerticalScenario { base_rate: BTreeMap::from([(1, -1.0)]), ..Default::default() };
        assert!(matches!(bad_rate.validate(&net), Err(ScenarioError::BadValue { .. })));
        let bad_attack = VerticalScenario { attack: Some(Attack { target: 2, rate: 5.0 }), ..Default::default() };
        assert!(matches!(bad_attack.validate(&net), Err(ScenarioError::Role { node: 2, .. })));
        let plain = Network::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(VerticalScenario::default().validate(&plain), Err(ScenarioError::NoControllers));
    }

    #[test]
    fn parse_scenario_file() {
        let net = load_edge_list("0 1\n[roles]\n0=edge\n1=core\nA=controller\n[controllers]\n0:A\n1:A\n").unwrap();
        let sc = VerticalScenario::parse("[capacity]\nA=100\n[rate]\n0=10\n1 = 10\n[attack]\n1=200\n", &net).unwrap();
        assert_eq!(sc.capacity(2), 100.0);
        assert_eq!(sc.effective_rate(1), 210.0);
        assert!(matches!(
            VerticalScenario::parse("[rate]\nZ=1\n", &net),
            Err(ScenarioError::UnknownNode { line: 2, .. })
        ));
        assert!(matches!(
            VerticalScenario::parse("[rate]\n0=abc\n", &net),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(VerticalScenario::parse("[weird]\n0=1\n", &net).is_err());
    }
}
