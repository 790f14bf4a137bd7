//! Rate heuristics: degree- and weight-proportional rates against the
//! min-max-load optimum, over the full and restricted set families.

use matchq::heuristics::{
    degree_proportional_rates, minimize_max_load, restricted_minimize_max_load,
    weight_proportional_rates, OptimizerOptions, WeightMatrix,
};
use matchq::CompatibilityGraph;

fn main() -> matchq::Result<()> {
    let options = OptimizerOptions::default();
    let graphs = [
        (
            "four-class",
            CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)])?,
        ),
        (
            "C9 plus chord",
            CompatibilityGraph::cycle(9)?.with_extra_edges(&[(4, 8)])?,
        ),
        ("racket", CompatibilityGraph::racket(4, 5)?),
    ];
    for (name, g) in &graphs {
        let index = g.independent_sets()?;
        let degree = degree_proportional_rates(g)?;
        let best = minimize_max_load(g, &options)?;
        println!("{name}: {} independent sets", index.nonempty_count());
        println!(
            "  degree rates   {:.4?}  max load {:.6}",
            degree.as_slice(),
            best.initial_max_load
        );
        println!(
            "  min-max rates  {:.4?}  max load {:.6}",
            best.rates.as_slice(),
            best.achieved_max_load
        );
        for k in 1..=2 {
            let r = restricted_minimize_max_load(g, k, &options)?;
            println!(
                "  sets of size <= {k}: objective {:.6}, true max load {:.6}",
                r.achieved_max_load,
                r.full_max_load.unwrap_or(f64::NAN)
            );
        }
    }

    // Heavier weight on edge 1-2 shifts traffic toward classes 1 and 2.
    let g = &graphs[0].1;
    let mut w = vec![vec![0.0; 4]; 4];
    for (i, j) in g.edges() {
        let x = if (i, j) == (0, 1) { 3.0 } else { 1.0 };
        w[i][j] = x;
        w[j][i] = x;
    }
    let alpha = weight_proportional_rates(g, &WeightMatrix::new(g, w)?)?;
    println!("weighted rates {:.4?}", alpha.as_slice());
    Ok(())
}
