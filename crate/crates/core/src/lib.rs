pub mod analytics;
pub mod cli;
pub mod error;
pub mod graph;
pub mod heavy_traffic;
pub mod heuristics;
pub mod io;
pub mod rates;
pub mod simulator;
pub mod validation;

pub use error::{Error, GraphDefect, Result};
pub use graph::{ClassSet, CompatibilityGraph, EnumerationLimits, IndependentSetIndex};
pub use rates::RateVector;
