//! Tail classes of the racket graph merge as the load grows.

use matchq::cli::{run_sweep, RateRule, SweepSpec};
use matchq::graph::DEFAULT_SET_CAP;
use matchq::CompatibilityGraph;

fn main() -> matchq::Result<()> {
    let graph = CompatibilityGraph::racket(4, 5)?;
    let grid = vec![0.5, 0.9, 0.99, 0.999, 0.9999];
    let rows = run_sweep(
        &SweepSpec::new(graph, RateRule::Racket, grid)?,
        DEFAULT_SET_CAP,
    )?;
    println!("rho      omega_5..omega_9                            spread");
    for row in rows {
        let tail: Vec<f64> = row.waiting_probability[4..9]
            .iter()
            .map(|w| w.unwrap())
            .collect();
        let hi = tail.iter().copied().fold(f64::MIN, f64::max);
        let lo = tail.iter().copied().fold(f64::MAX, f64::min);
        println!(
            "{:<8} {:.4?}  {:.3}%",
            row.load,
            tail,
            100.0 * (hi / lo - 1.0)
        );
    }
    Ok(())
}
