//! Generating function of the queue lengths and the transform of a matching
//! time, with moments recovered by finite differences.

use matchq::analytics::{evaluate_pgf, lst_matching_time, MetricsTable};
use matchq::{CompatibilityGraph, RateVector};

fn main() -> matchq::Result<()> {
    let graph = CompatibilityGraph::complete(3)?;
    let index = graph.independent_sets()?;
    let alpha = RateVector::new(vec![0.2, 0.35, 0.45])?;
    let m = MetricsTable::compute(&index, &alpha)?;

    println!("g(1,1,1) = {}", evaluate_pgf(&index, &alpha, &[1.0; 3])?);
    println!(
        "g(0,0,0) = {:.6} = pi(empty) {:.6}",
        evaluate_pgf(&index, &alpha, &[0.0; 3])?,
        m.pi_empty
    );

    let h = 1e-5;
    for i in 0..3 {
        let mut z = [1.0; 3];
        z[i] = 1.0 - h;
        let dg = (1.0 - evaluate_pgf(&index, &alpha, &z)?) / h;
        let u = h * alpha[i];
        let dphi = (1.0 - lst_matching_time(&index, &alpha, i, u)?) / u;
        println!(
            "class {}: dg/dz {dg:.5} vs L {:.5}; -dphi/du {dphi:.5} vs E[T] {:.5}",
            i + 1,
            m.li[i],
            m.eti[i].unwrap()
        );
    }
    Ok(())
}
