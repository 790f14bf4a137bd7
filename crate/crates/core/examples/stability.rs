//! Stability checks: the load of every independent set must stay below one.

use matchq::analytics::check_stability;
use matchq::{CompatibilityGraph, RateVector};

fn report(graph: &CompatibilityGraph, raw: &[f64]) -> matchq::Result<()> {
    let alpha = RateVector::new(raw.to_vec())?;
    let r = check_stability(graph, &alpha)?;
    print!("{:.4?}: ", alpha.as_slice());
    if let Some(defect) = r.graph_defect {
        println!("never stable ({defect:?})");
    } else if r.stable {
        println!("stable, max load {:.4} at {}", r.max_load, r.argmax_set);
    } else {
        let sets: Vec<String> = r
            .violations
            .iter()
            .map(|(s, l)| format!("{s} ({l:.3})"))
            .collect();
        println!("unstable, overloaded sets {}", sets.join(", "));
    }
    Ok(())
}

fn main() -> matchq::Result<()> {
    let fig = CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)])?;
    report(&fig, &[0.25, 0.25, 0.375, 0.125])?;
    report(&fig, &[0.2, 0.2, 0.2, 0.4])?;
    report(&fig, &[0.4, 0.4, 0.1, 0.1])?;

    let c9 = CompatibilityGraph::cycle(9)?;
    report(&c9, &[1.0; 9])?;

    // A single edge is bipartite: no rate vector is stable.
    let edge = CompatibilityGraph::new(2, &[(0, 1)])?;
    report(&edge, &[0.5, 0.5])?;
    Ok(())
}
