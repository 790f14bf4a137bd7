//! Graph and rate file formats.
//!
//! Graphs are either a line format
//!
//! ```text
//! # comment
//! 4
//! 1 2
//! 1 3
//! ```
//!
//! (class count, then one 1-based edge per line) or JSON
//! `{"n": 4, "edges": [[1, 2], [1, 3]]}`. Rates are one value per line or a
//! JSON array; vectors that do not sum to one are rescaled with a warning.

use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CompatibilityGraph;
use crate::rates::{RateVector, NORMALIZED_TOLERANCE};

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

pub fn parse_graph(text: &str) -> Result<CompatibilityGraph> {
    if text.trim_start().starts_with('{') {
        let g: GraphJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph JSON: {e}")))?;
        return CompatibilityGraph::from_one_based(g.n, &g.edges);
    }
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (k, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("graph file is empty".into()))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::Parse(format!("line {k}: expected the class count, got {first:?}")))?;
    let mut edges = Vec::new();
    for (k, line) in lines {
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        let [i, j] = fields.as_slice() else {
            return Err(Error::Parse(format!(
                "line {k}: expected two class indices, got {line:?}"
            )));
        };
        let parse = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {k}: {f:?} is not a class index")))
        };
        edges.push((parse(i)?, parse(j)?));
    }
    CompatibilityGraph::from_one_based(n, &edges)
}

/// Serializes a graph in the line format.
pub fn format_graph(graph: &CompatibilityGraph) -> String {
    let mut out = format!("{}\n", graph.n_classes());
    for (i, j) in graph.edges() {
        out.push_str(&format!("{} {}\n", i + 1, j + 1));
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<CompatibilityGraph> {
    parse_graph(&read(path.as_ref())?)
}

/// Parses a rate vector; `expected` checks the number of entries.
pub fn parse_rates(text: &str, expected: Option<usize>) -> Result<RateVector> {
    let raw: Vec<f64> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("rates JSON: {e}")))?
    } else {
        text.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{l:?} is not a number")))
            })
            .collect::<Result<_>>()?
    };
    if let Some(n) = expected {
        if raw.len() != n {
            return Err(Error::Parse(format!(
                "expected {n} rates, got {}",
                raw.len()
            )));
        }
    }
    let total: f64 = raw.iter().sum();
    if total.is_finite() && total > 0.0 && (total - 1.0).abs() > NORMALIZED_TOLERANCE {
        warn!("rates sum to {total}; rescaling to 1");
    }
    RateVector::new(raw)
}

pub fn format_rates(rates: &RateVector) -> String {
    rates
        .as_slice()
        .iter()
        .map(|a| format!("{a:.12e}\n"))
        .collect()
}

pub fn read_rates(path: impl AsRef<Path>, expected: Option<usize>) -> Result<RateVector> {
    parse_rates(&read(path.as_ref())?, expected)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
