//! Batch-means simulation next to the exact metrics.
//!
//! ```text
//! cargo run --release --example simulate
//! ```

use matchq::analytics::MetricsTable;
use matchq::simulator::{replicate_with, SimulationConfig};
use matchq::{CompatibilityGraph, RateVector};

fn main() -> matchq::Result<()> {
    let graph = CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)])?;
    let index = graph.independent_sets()?;
    let alpha = RateVector::new(vec![2.0, 2.0, 3.0, 1.0])?;
    let exact = MetricsTable::compute(&index, &alpha)?;

    let config = SimulationConfig::new(500_000, 42);
    let est = replicate_with(&graph, &index, &alpha, &config, 4)?;
    println!(
        "{} replications of {} steps, {:.0}% intervals",
        4,
        config.steps,
        100.0 * config.confidence
    );
    println!("class  omega exact  omega sim            L exact  L sim");
    for i in 0..graph.n_classes() {
        let w = est.omega_hat[i].unwrap();
        let l = est.li_hat[i];
        println!(
            "{:<6} {:.5}      {:.5} +- {:.5}   {:.5}  {:.5} +- {:.5}",
            i + 1,
            exact.omega[i],
            w.mean,
            w.half_width,
            exact.li[i],
            l.mean,
            l.half_width
        );
    }
    let p0 = est.pi_empty();
    println!(
        "pi(empty) {:.5} vs {:.5} +- {:.5}",
        exact.pi_empty, p0.mean, p0.half_width
    );
    println!(
        "worst deviation {:.2} half-widths",
        est.worst_deviation(&exact)
    );
    Ok(())
}
