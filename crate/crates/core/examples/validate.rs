//! Product-form checks on explicit buffer words: partial balance residuals,
//! and truncated sums against the closed-form aggregate.

use matchq::analytics::compute_psi;
use matchq::validation::{
    check_partial_balance, enumerate_states, tail_bound, truncated_aggregate,
};
use matchq::{CompatibilityGraph, RateVector};

fn main() -> matchq::Result<()> {
    let graph = CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)])?;
    let alpha = RateVector::new(vec![2.0, 2.0, 3.0, 1.0])?;

    let space = enumerate_states(&graph, 6, 1_000_000)?;
    let worst = space
        .states
        .iter()
        .map(|w| check_partial_balance(&graph, &alpha, w).map(|pb| pb.max_residual()))
        .collect::<matchq::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!(
        "{} words up to length 6, largest residual {worst:.2e}",
        space.len()
    );

    let index = graph.independent_sets()?;
    let psi = compute_psi(&index, &alpha)?;
    println!("set     K   psi          truncated    gap          bound");
    for pos in index.nonempty_positions() {
        let set = index.set(pos);
        for k in [4, 8, 14] {
            let exact = psi.value(pos);
            let partial = truncated_aggregate(&graph, &alpha, set, k, 10_000_000)?;
            let bound = tail_bound(&graph, &alpha, set, exact, k)?;
            println!(
                "{:<7} {k:<3} {exact:.6e} {partial:.6e} {:.6e} {bound:.6e}",
                set.to_string(),
                exact - partial
            );
        }
    }
    Ok(())
}
