//! Stationary metrics of the four-class example graph.
//!
//! ```text
//! cargo run --example analyze
//! ```

use matchq::analytics::MetricsTable;
use matchq::{CompatibilityGraph, RateVector};

fn main() -> matchq::Result<()> {
    // Triangle 1-2-3 with class 4 hanging off class 3.
    let graph = CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)])?;
    let index = graph.independent_sets()?;

    for raw in [vec![2.0, 2.0, 3.0, 1.0], vec![1.0, 1.0, 1.0, 0.0]] {
        let alpha = RateVector::new(raw)?;
        let m = MetricsTable::compute(&index, &alpha)?;
        println!("rates {:?}", alpha.as_slice());
        for (pos, set) in index.sets().iter().enumerate() {
            println!("  pi({set}) = {:.6}", m.pi.values[pos]);
        }
        for i in 0..graph.n_classes() {
            let eti = m.eti[i].map_or("-".to_string(), |t| format!("{t:.4}"));
            println!(
                "  class {}: omega {:.4}  L {:.4}  E[T] {eti}",
                i + 1,
                m.omega[i],
                m.li[i]
            );
        }
        println!("  L = {:.6}, E[T] = {:.6}\n", m.l, m.et);
    }
    Ok(())
}
