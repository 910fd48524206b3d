use thiserror::Error;

use crate::graph::NodeId;

/// Errors raised while reading, generating or querying a social graph.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: malformed edge: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: weight {weight} of edge {u} -> {v} is outside [0, 1]")]
    WeightOutOfRange {
        line: usize,
        u: NodeId,
        v: NodeId,
        weight: f64,
    },
    #[error("line {line}: duplicate edge {u} -> {v}")]
    DuplicateEdge { line: usize, u: NodeId, v: NodeId },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraphError {
    fn from(err: std::io::Error) -> Self {
        GraphError::Io(err.to_string())
    }
}

/// Errors raised while assembling an influence arborescence.
#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("target {0} is already a friend of the initiator")]
    TargetIsFriend(NodeId),
    #[error("target {target} is unreachable from every friend of {initiator} and no homophily edge applies")]
    TargetUnreachable { initiator: NodeId, target: NodeId },
    #[error("homophily probability {value} for node {node} is outside [0, 1]")]
    InvalidHomophily { node: NodeId, value: f64 },
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised by the evaluators.
#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("node {0} is not a selectable node of the tree")]
    NotInTree(NodeId),
    #[error("node {0} is a friend of the initiator and cannot be invited")]
    FriendSelected(NodeId),
    #[error("{edges} relevant edges exceed the enumeration limit of {limit}")]
    TooLarge { edges: usize, limit: usize },
    #[error("selected subgraph contains a cycle through node {0}")]
    Cyclic(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised by the planners.
#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("invitation budget must be at least 1")]
    ZeroBudget,
    #[error("arborescence has no friend leaves")]
    EmptyTree,
    #[error(
        "exhaustive allocation would visit {states:.3e} states, above the limit of {limit:.0e}"
    )]
    EnumerationGuard { states: f64, limit: f64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Errors raised by the experiment harness.
#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("experiment file line {line}: {reason}")]
    Spec { line: usize, reason: String },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("no pair satisfying {constraint} found after {retries} attempts")]
    Sampling { constraint: String, retries: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
