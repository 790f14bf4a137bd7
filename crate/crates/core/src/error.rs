use thiserror::Error;

use crate::graph::ClassSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have between 2 and {max} classes, got {got}")]
    ClassCount { got: usize, max: usize },

    #[error("class index {index} is out of range for a graph with {n} classes")]
    ClassOutOfRange { index: usize, n: usize },

    #[error("self-edge on class {0} is not allowed")]
    SelfEdge(usize),

    #[error("graph is not supported here: {0}")]
    UnsupportedGraph(GraphDefect),

    #[error("enumeration exceeded the cap of {limit} entries")]
    ResourceCap { limit: usize },

    #[error("invalid rate vector: {0}")]
    InvalidRates(String),

    #[error("unstable: independent set {set} has load {load:.6} (denominator {denominator:.3e})")]
    Unstable {
        set: ClassSet,
        load: f64,
        denominator: f64,
    },

    #[error("degenerate denominator: every neighbor of {0} has zero rate")]
    DegenerateDenominator(ClassSet),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Reason a graph cannot host a stable matching model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphDefect {
    Bipartite,
    Disconnected,
}

impl std::fmt::Display for GraphDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphDefect::Bipartite => {
                f.write_str("bipartite (no arrival rates satisfy the stability condition)")
            }
            GraphDefect::Disconnected => f.write_str("disconnected"),
        }
    }
}
