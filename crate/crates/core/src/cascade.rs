//! Pieces shared by the vertical and horizontal cascade engines.

use thiserror::Error;

use crate::sections::Line;
use crate::topology::{Network, NodeId};

/// Per-round snapshots of a deterministic cascade. The last round is the
/// one in which nothing failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace<R> {
    pub rounds: Vec<R>,
}

impl<R> CascadeTrace<R> {
    pub fn terminal(&self) -> &R {
        self.rounds.last().expect("a cascade has at least one round")
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown node `{token}`")]
    UnknownNode { line: usize, token: String },
    #[error("{what} for node {node} must be a nonnegative finite number, got {value}")]
    BadValue {
        what: &'static str,
        node: NodeId,
        value: f64,
    },
    #[error("node {node}: {message}")]
    Role { node: NodeId, message: String },
    #[error("the network has no controllers")]
    NoControllers,
    #[error("demand {index} starts and ends at node {node}")]
    LoopDemand { index: usize, node: NodeId },
    #[error("node {0} does not exist")]
    MissingNode(NodeId),
}

pub(crate) fn check_value(what: &'static str, node: NodeId, value: f64) -> Result<(), ScenarioError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::BadValue { what, node, value })
    }
}

/// Like [`check_value`] but also accepts `+inf` (an unbounded capacity).
pub(crate) fn check_capacity(node: NodeId, value: f64) -> Result<(), ScenarioError> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::BadValue { what: "capacity", node, value })
    }
}

pub(crate) fn resolve(net: &Network, token: &str, line: usize) -> Result<NodeId, ScenarioError> {
    net.resolve(token).ok_or_else(|| ScenarioError::UnknownNode {
        line,
        token: token.trim().to_string(),
    })
}

pub(crate) fn parse_number(text: &str, line: usize) -> Result<f64, ScenarioError> {
    let t = text.trim();
    let value = match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => f64::INFINITY,
        _ => t.parse().map_err(|_| ScenarioError::Parse {
            line,
            message: format!("invalid number `{t}`"),
        })?,
    };
    Ok(value)
}

/// Parses a `node=value` line.
pub(crate) fn node_value(net: &Network, line: &Line) -> Result<(NodeId, f64), ScenarioError> {
    let (k, v) = crate::sections::key_value(&line.text).ok_or_else(|| ScenarioError::Parse {
        line: line.number,
        message: format!("expected `node=value`, got `{}`", line.text),
    })?;
    Ok((resolve(net, k, line.number)?, parse_number(v, line.number)?))
}

/// Formats a capacity, writing `inf` for unbounded ones.
pub(crate) fn fmt_capacity(c: f64) -> String {
    if c.is_infinite() {
        "inf".to_string()
    } else {
        c.to_string()
    }
}
