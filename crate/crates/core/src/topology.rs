//! Two-plane network graphs: construction, edge-list I/O, random generators
//! and structural validation.
//!
//! A single undirected adjacency serves as both the control-plane and the
//! data-plane neighbor relation. Controllers are ordinary nodes with the
//! `controller` role; switches reach them through ordered preference lists.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::sections::{self, Section};

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop on node {node}{}", at_line(*.line))]
    SelfLoop { node: NodeId, line: Option<usize> },
    #[error("duplicate edge {u}-{v}{}", at_line(*.line))]
    DuplicateEdge {
        u: NodeId,
        v: NodeId,
        line: Option<usize>,
    },
    #[error("dangling node id {id}{}", at_line(*.line))]
    DanglingId { id: NodeId, line: Option<usize> },
    #[error("node {node}: {message}")]
    Role { node: NodeId, message: String },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum NodeRole {
    EdgeSwitch,
    CoreSwitch,
    Controller,
    #[default]
    Generic,
}

impl NodeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::EdgeSwitch => "edge_switch",
            NodeRole::CoreSwitch => "core_switch",
            NodeRole::Controller => "controller",
            NodeRole::Generic => "generic",
        }
    }

    pub fn is_switch(self) -> bool {
        matches!(self, NodeRole::EdgeSwitch | NodeRole::CoreSwitch)
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "edge_switch" | "edge" => Ok(NodeRole::EdgeSwitch),
            "core_switch" | "core" => Ok(NodeRole::CoreSwitch),
            "controller" | "ctrl" => Ok(NodeRole::Controller),
            "generic" => Ok(NodeRole::Generic),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// Immutable two-plane network. Node ids are `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    roles: Vec<NodeRole>,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
    controller_prefs: BTreeMap<NodeId, Vec<NodeId>>,
    aliases: BTreeMap<String, NodeId>,
}

impl Network {
    /// Builds a network and checks every structural invariant.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        roles: BTreeMap<NodeId, NodeRole>,
        controller_prefs: BTreeMap<NodeId, Vec<NodeId>>,
        aliases: BTreeMap<String, NodeId>,
    ) -> Result<Self, TopologyError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for id in [u, v] {
                if id >= node_count {
                    return Err(TopologyError::DanglingId { id, line: None });
                }
            }
            if u == v {
                return Err(TopologyError::SelfLoop { node: u, line: None });
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(TopologyError::DuplicateEdge { u, v, line: None });
            }
        }
        let mut role_vec = vec![NodeRole::Generic; node_count];
        for (id, role) in roles {
            if id >= node_count {
                return Err(TopologyError::DanglingId { id, line: None });
            }
            role_vec[id] = role;
        }
        for (&switch, prefs) in &controller_prefs {
            if switch >= node_count {
                return Err(TopologyError::DanglingId { id: switch, line: None });
            }
            if !role_vec[switch].is_switch() {
                return Err(TopologyError::Role {
                    node: switch,
                    message: format!(
                        "has controller preferences but role {}",
                        role_vec[switch]
                    ),
                });
            }
            let mut seen = BTreeSet::new();
            for &c in prefs {
                if c >= node_count {
                    return Err(TopologyError::DanglingId { id: c, line: None });
                }
                if role_vec[c] != NodeRole::Controller {
                    return Err(TopologyError::Role {
                        node: c,
                        message: format!(
                            "listed as controller of {switch} but has role {}",
                            role_vec[c]
                        ),
                    });
                }
                if !seen.insert(c) {
                    return Err(TopologyError::Role {
                        node: switch,
                        message: format!("controller {c} listed twice"),
                    });
                }
            }
        }
        for (name, &id) in &aliases {
            if id >= node_count {
                return Err(TopologyError::DanglingId { id, line: None });
            }
            if name.parse::<NodeId>().is_ok() {
                return Err(TopologyError::Role {
                    node: id,
                    message: format!("alias `{name}` is numeric"),
                });
            }
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &set {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Network {
            roles: role_vec,
            edges: set.into_iter().collect(),
            adjacency,
            controller_prefs,
            aliases,
        })
    }

    /// All-generic network with no controllers.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, TopologyError> {
        Network::new(
            node_count,
            edges,
            BTreeMap::new(),
            BTreeMap::new(),
            BTreeMap::new(),
        )
    }

    /// Returns a copy with the given roles applied on top of the current ones.
    pub fn with_roles(
        &self,
        roles: impl IntoIterator<Item = (NodeId, NodeRole)>,
    ) -> Result<Self, TopologyError> {
        let mut merged: BTreeMap<NodeId, NodeRole> = self.roles.iter().copied().enumerate().collect();
        merged.extend(roles);
        Network::new(
            self.node_count(),
            self.edges.iter().copied(),
            merged,
            self.controller_prefs.clone(),
            self.aliases.clone(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn role(&self, v: NodeId) -> NodeRole {
        self.roles[v]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: NodeId) -> Result<&[NodeId], TopologyError> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(TopologyError::UnknownNode(v))
    }

    pub(crate) fn adj(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    pub fn controller_prefs(&self) -> &BTreeMap<NodeId, Vec<NodeId>> {
        &self.controller_prefs
    }

    /// Preference list of `switch`; empty when none was declared.
    pub fn prefs_of(&self, switch: NodeId) -> &[NodeId] {
        self.controller_prefs
            .get(&switch)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn controllers(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids_with(|r| r == NodeRole::Controller)
    }

    pub fn switches(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids_with(NodeRole::is_switch)
    }

    fn ids_with<F: Fn(NodeRole) -> bool + 'static>(&self, pred: F) -> impl Iterator<Item = NodeId> + '_ {
        self.roles
            .iter()
            .enumerate()
            .filter(move |(_, r)| pred(**r))
            .map(|(i, _)| i)
    }

    pub fn aliases(&self) -> &BTreeMap<String, NodeId> {
        &self.aliases
    }

    /// Resolves a numeric id or an alias name.
    pub fn resolve(&self, token: &str) -> Option<NodeId> {
        let token = token.trim();
        match token.parse::<NodeId>() {
            Ok(id) if id < self.node_count() => Some(id),
            Ok(_) => None,
            Err(_) => self.aliases.get(token).copied(),
        }
    }

    /// Display name: the alias if one exists, else the numeric id.
    pub fn label(&self, v: NodeId) -> String {
        self.aliases
            .iter()
            .find(|(_, &id)| id == v)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| v.to_string())
    }

    /// Connected components of the subgraph induced by nodes for which
    /// `keep` holds, each sorted, ordered by smallest member.
    pub fn components(&self, keep: impl Fn(NodeId) -> bool) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] || !keep(start) {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &w in &self.adjacency[u] {
                    if !seen[w] && keep(w) {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Hop distances from the nearest of `sources`; `None` when unreachable.
    pub fn bfs_distances(&self, sources: &[NodeId]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if s < dist.len() && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued nodes have a distance");
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Serializes to the edge-list text format; `load_edge_list` inverts it.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str("[nodes]\n");
        out.push_str(&format!("count={}\n", self.node_count()));
        out.push_str("[edges]\n");
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        let annotated: Vec<_> = self
            .roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r != NodeRole::Generic)
            .collect();
        if !annotated.is_empty() {
            out.push_str("[roles]\n");
            for (id, role) in annotated {
                out.push_str(&format!("{id}={role}\n"));
            }
        }
        if !self.controller_prefs.is_empty() {
            out.push_str("[controllers]\n");
            for (s, prefs) in &self.controller_prefs {
                let list: Vec<String> = prefs.iter().map(|c| c.to_string()).collect();
                out.push_str(&format!("{s}:{}\n", list.join(",")));
            }
        }
        if !self.aliases.is_empty() {
            out.push_str("[aliases]\n");
            for (name, id) in &self.aliases {
                out.push_str(&format!("{name}={id}\n"));
            }
        }
        out
    }
}

/// Section names understood by the edge-list loader.
pub const TOPOLOGY_SECTIONS: [&str; 5] = ["edges", "roles", "controllers", "aliases", "nodes"];

/// Parses an edge-list file.
///
/// Lines before any header (or inside `[edges]`) are `u v` pairs. Optional
/// sections: `[roles]` with `id=role`, `[controllers]` with
/// `switch:ctrl,ctrl,...`, `[aliases]` with `name=id`, and `[nodes]` with
/// `count=N`. Tokens that are not integers are names; unknown names get
/// fresh ids after the largest numeric id, in order of first appearance.
pub fn load_edge_list(text: &str) -> Result<Network, TopologyError> {
    let sections = sections::parse(text);
    for s in &sections {
        if let Some(name) = &s.name {
            if !TOPOLOGY_SECTIONS.contains(&name.as_str()) {
                return Err(TopologyError::Parse {
                    line: s.header_line,
                    message: format!("unknown section [{name}]"),
                });
            }
        }
    }
    from_sections(&sections)
}

/// Builds a network from already-split sections. Sections with names
/// outside [`TOPOLOGY_SECTIONS`] are ignored, so config files can embed a
/// topology next to other settings.
pub fn from_sections(sections: &[Section]) -> Result<Network, TopologyError> {
    let mut edges: Vec<(String, String, usize)> = Vec::new();
    let mut roles: Vec<(String, NodeRole, usize)> = Vec::new();
    let mut prefs: Vec<(String, Vec<String>, usize)> = Vec::new();
    let mut explicit_aliases: Vec<(String, NodeId, usize)> = Vec::new();
    let mut declared_count: Option<(usize, usize)> = None;

    let parse_err = |line: usize, message: String| TopologyError::Parse { line, message };

    for s in sections {
        let name = s.name.as_deref().unwrap_or("edges");
        for line in &s.lines {
            let t = line.text.as_str();
            match name {
                "edges" => {
                    let toks: Vec<&str> = t.split_whitespace().collect();
                    if toks.len() != 2 {
                        return Err(parse_err(line.number, format!("expected `u v`, got `{t}`")));
                    }
                    check_token(toks[0], line.number)?;
                    check_token(toks[1], line.number)?;
                    edges.push((toks[0].into(), toks[1].into(), line.number));
                }
                "roles" => {
                    let (k, v) = sections::key_value(t)
                        .ok_or_else(|| parse_err(line.number, format!("expected `id=role`, got `{t}`")))?;
                    check_token(k, line.number)?;
                    let role = v.parse().map_err(|m| parse_err(line.number, m))?;
                    roles.push((k.into(), role, line.number));
                }
                "controllers" => {
                    let (k, v) = t.split_once(':').ok_or_else(|| {
                        parse_err(line.number, format!("expected `switch:ctrl,...`, got `{t}`"))
                    })?;
                    let k = k.trim();
                    check_token(k, line.number)?;
                    let mut list = Vec::new();
                    for c in v.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                        check_token(c, line.number)?;
                        list.push(c.to_string());
                    }
                    prefs.push((k.into(), list, line.number));
                }
                "aliases" => {
                    let (k, v) = sections::key_value(t)
                        .ok_or_else(|| parse_err(line.number, format!("expected `name=id`, got `{t}`")))?;
                    if k.parse::<NodeId>().is_ok() || check_token(k, line.number).is_err() {
                        return Err(parse_err(line.number, format!("invalid alias name `{k}`")));
                    }
                    let id = v
                        .parse()
                        .map_err(|_| parse_err(line.number, format!("invalid node id `{v}`")))?;
                    explicit_aliases.push((k.into(), id, line.number));
                }
                "nodes" => {
                    let count = sections::key_value(t)
                        .filter(|(k, _)| *k == "count")
                        .and_then(|(_, v)| v.parse().ok())
                        .ok_or_else(|| parse_err(line.number, format!("expected `count=N`, got `{t}`")))?;
                    declared_count = Some((count, line.number));
                }
                _ => {}
            }
        }
    }

    // Fresh ids for names start after every numeric id mentioned anywhere.
    let mut next_id = 0;
    let numeric_tokens = edges
        .iter()
        .flat_map(|(u, v, _)| [u.as_str(), v.as_str()])
        .chain(roles.iter().map(|(k, _, _)| k.as_str()))
        .chain(prefs.iter().flat_map(|(k, l, _)| std::iter::once(k.as_str()).chain(l.iter().map(String::as_str))));
    for tok in numeric_tokens {
        if let Ok(id) = tok.parse::<NodeId>() {
            next_id = next_id.max(id + 1);
        }
    }
    let mut aliases = BTreeMap::new();
    let mut taken_by_alias = BTreeSet::new();
    for (name, id, line) in explicit_aliases {
        if aliases.insert(name.clone(), id).is_some() || !taken_by_alias.insert(id) {
            return Err(parse_err(line, format!("alias `{name}` conflicts with an earlier alias")));
        }
        next_id = next_id.max(id + 1);
    }
    let mut resolve = |tok: &str| -> NodeId {
        if let Ok(id) = tok.parse::<NodeId>() {
            return id;
        }
        *aliases.entry(tok.to_string()).or_insert_with(|| {
            let id = next_id;
            next_id += 1;
            id
        })
    };

    let mut edge_ids = Vec::with_capacity(edges.len());
    for (u, v, line) in &edges {
        edge_ids.push((resolve(u), resolve(v), *line));
    }
    let mut role_ids = Vec::with_capacity(roles.len());
    for (k, role, line) in &roles {
        role_ids.push((resolve(k), *role, *line));
    }
    let mut pref_ids = Vec::with_capacity(prefs.len());
    for (k, list, line) in &prefs {
        let key = resolve(k);
        let vals: Vec<NodeId> = list.iter().map(|c| resolve(c)).collect();
        pref_ids.push((key, vals, *line));
    }

    // Edges and roles declare nodes; controller lists may only reference
    // nodes that already exist.
    let implicit = edge_ids
        .iter()
        .map(|(u, v, _)| u.max(v) + 1)
        .chain(role_ids.iter().map(|(id, _, _)| id + 1))
        .max()
        .unwrap_or(0);
    let node_count = match declared_count {
        Some((count, line)) => {
            if let Some(&(u, v, l)) = edge_ids.iter().find(|(u, v, _)| *u.max(v) >= count) {
                return Err(TopologyError::DanglingId { id: u.max(v), line: Some(l) });
            }
            if let Some(&(id, _, l)) = role_ids.iter().find(|(id, _, _)| *id >= count) {
                return Err(TopologyError::DanglingId { id, line: Some(l) });
            }
            if count == 0 {
                return Err(parse_err(line, "node count must be positive".into()));
            }
            count
        }
        None => implicit,
    };
    if node_count == 0 {
        return Err(parse_err(1, "no nodes".into()));
    }

    let mut edge_set = BTreeSet::new();
    for &(u, v, line) in &edge_ids {
        if u == v {
            return Err(TopologyError::SelfLoop { node: u, line: Some(line) });
        }
        if !edge_set.insert((u.min(v), u.max(v))) {
            return Err(TopologyError::DuplicateEdge { u, v, line: Some(line) });
        }
    }
    let mut role_map = BTreeMap::new();
    for &(id, role, line) in &role_ids {
        if role_map.insert(id, role).is_some_and(|prev| prev != role) {
            return Err(parse_err(line, format!("conflicting roles for node {id}")));
        }
    }
    let mut pref_map = BTreeMap::new();
    for (key, vals, line) in pref_ids {
        for &id in std::iter::once(&key).chain(&vals) {
            if id >= node_count {
                return Err(TopologyError::DanglingId { id, line: Some(line) });
            }
        }
        if pref_map.insert(key, vals).is_some() {
            return Err(parse_err(line, format!("duplicate controller list for {key}")));
        }
    }
    for (name, &id) in &aliases {
        if id >= node_count {
            return Err(parse_err(0, format!("alias `{name}` refers to missing node {id}")));
        }
    }
    Network::new(node_count, edge_set, role_map, pref_map, aliases)
}

fn check_token(tok: &str, line: usize) -> Result<(), TopologyError> {
    let ok = !tok.is_empty()
        && tok
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
    if ok {
        Ok(())
    } else {
        Err(TopologyError::Parse {
            line,
            message: format!("invalid node token `{tok}`"),
        })
    }
}

/// Random and regular topology families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyKind {
    ErdosRenyi { n: usize, p: f64 },
    BarabasiAlbert { n: usize, m: usize },
    Ring { n: usize },
    Grid { rows: usize, cols: usize },
}

impl TopologyKind {
    fn check(&self) -> Result<(), TopologyError> {
        let bad = |m: String| Err(TopologyError::InvalidParameter(m));
        match *self {
            TopologyKind::ErdosRenyi { n, p } => {
                if n < 2 {
                    return bad(format!("erdos_renyi needs n >= 2, got {n}"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("erdos_renyi needs 0 <= p <= 1, got {p}"));
                }
            }
            TopologyKind::BarabasiAlbert { n, m } => {
                if n < 2 || m < 1 || m >= n {
                    return bad(format!("barabasi_albert needs n >= 2 and 1 <= m < n, got n={n} m={m}"));
                }
            }
            TopologyKind::Ring { n } => {
                if n < 2 {
                    return bad(format!("ring needs n >= 2, got {n}"));
                }
            }
            TopologyKind::Grid { rows, cols } => {
                if rows == 0 || cols == 0 || rows * cols < 2 {
                    return bad(format!("grid needs at least 2 cells, got {rows}x{cols}"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::ErdosRenyi { n, p } => write!(f, "er {n} {p}"),
            TopologyKind::BarabasiAlbert { n, m } => write!(f, "ba {n} {m}"),
            TopologyKind::Ring { n } => write!(f, "ring {n}"),
            TopologyKind::Grid { rows, cols } => write!(f, "grid {rows} {cols}"),
        }
    }
}

impl FromStr for TopologyKind {
    type Err = TopologyError;

    /// Accepts `er N P`, `ba N M`, `ring N`, `grid R C` (long names
    /// `erdos_renyi` and `barabasi_albert` also work).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let bad = || TopologyError::InvalidParameter(format!("cannot parse generator `{}`", s.trim()));
        let int = |i: usize| toks.get(i).and_then(|t| t.parse::<usize>().ok()).ok_or_else(bad);
        let kind = match (toks.first().copied(), toks.len()) {
            (Some("er" | "erdos_renyi"), 3) => TopologyKind::ErdosRenyi {
                n: int(1)?,
                p: toks[2].parse().map_err(|_| bad())?,
            },
            (Some("ba" | "barabasi_albert"), 3) => TopologyKind::BarabasiAlbert { n: int(1)?, m: int(2)? },
            (Some("ring"), 2) => TopologyKind::Ring { n: int(1)? },
            (Some("grid"), 3) => TopologyKind::Grid { rows: int(1)?, cols: int(2)? },
            _ => return Err(bad()),
        };
        kind.check()?;
        Ok(kind)
    }
}

/// Generates a topology. Identical `(kind, seed)` always yields an identical
/// network; all roles are generic.
pub fn generate_topology(kind: TopologyKind, seed: u64) -> Result<Network, TopologyError> {
    kind.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, edges) = match kind {
        TopologyKind::ErdosRenyi { n, p } => {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.random::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            (n, edges)
        }
        TopologyKind::BarabasiAlbert { n, m } => (n, barabasi_albert(n, m, &mut rng)),
        TopologyKind::Ring { n } => {
            let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            if n > 2 {
                edges.push((0, n - 1));
            }
            (n, edges)
        }
        TopologyKind::Grid { rows, cols } => {
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let id = r * cols + c;
                    if c + 1 < cols {
                        edges.push((id, id + 1));
                    }
                    if r + 1 < rows {
                        edges.push((id, id + cols));
                    }
                }
            }
            (rows * cols, edges)
        }
    };
    Network::from_edges(n, edges)
}

/// Preferential attachment seeded by a clique on `m + 1` nodes, so every
/// node ends with degree at least `m`.
fn barabasi_albert(n: usize, m: usize, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    // Each node appears once per incident edge end.
    let mut ends = Vec::new();
    for u in 0..=m {
        for v in (u + 1)..=m {
            edges.push((u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    for v in (m + 1)..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(ends[rng.random_range(0..ends.len())]);
        }
        for t in targets {
            edges.push((t, v));
            ends.push(t);
            ends.push(v);
        }
    }
    edges
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    DpDisconnected { components: usize },
    UnassignedSwitch(NodeId),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DpDisconnected { components } => {
                write!(f, "DP disconnected ({components} components)")
            }
            Warning::UnassignedSwitch(v) => write!(f, "unassigned switch {v}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every invariant and reports soft problems.
///
/// The data plane is the subgraph without controllers. The unassigned-switch
/// warning only fires for SDN networks, i.e. ones with at least one
/// controller.
pub fn validate(net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = net.node_count();
    let mut seen = BTreeSet::new();
    for &(u, v) in net.edges() {
        if u == v {
            report.violations.push(format!("self-loop on {u}"));
        }
        if u >= n || v >= n {
            report.violations.push(format!("edge {u}-{v} references a missing node"));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            report.violations.push(format!("duplicate edge {u}-{v}"));
        }
    }
    for u in 0..n {
        for &v in net.adj(u) {
            if !net.has_edge(v, u) {
                report.violations.push(format!("asymmetric adjacency {u}->{v}"));
            }
        }
    }
    for (&s, prefs) in net.controller_prefs() {
        if s >= n || !net.role(s).is_switch() {
            report.violations.push(format!("controller list keyed by non-switch {s}"));
        }
        for &c in prefs {
            if c >= n || net.role(c) != NodeRole::Controller {
                report.violations.push(format!("switch {s} lists non-controller {c}"));
            }
        }
    }

    let dp = net.components(|v| net.role(v) != NodeRole::Controller);
    if dp.len() > 1 {
        report.warnings.push(Warning::DpDisconnected { components: dp.len() });
    }
    if net.controllers().next().is_some() {
        for s in net.switches() {
            if net.prefs_of(s).is_empty() {
                report.warnings.push(Warning::UnassignedSwitch(s));
            }
        }
    }
    report
}
