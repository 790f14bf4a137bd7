//! Heavy-traffic behavior of the 9-cycle as the saturated set {1,3,5,7}
//! approaches critical load.

use matchq::heavy_traffic::{asymptotic_metrics, convergence_sweep, pgf_limit_check, ScalingSpec};
use matchq::{ClassSet, CompatibilityGraph};

fn main() -> matchq::Result<()> {
    let graph = CompatibilityGraph::cycle(9)?;
    let index = graph.independent_sets()?;
    let saturated: ClassSet = [0, 2, 4, 6].into_iter().collect();
    let spec = ScalingSpec::uniform(&graph, saturated, 0.9)?;
    let limit = asymptotic_metrics(&graph, &index, &spec)?;

    println!("rho      pi(I)    omega_1  omega_2  (1-rho)L/rho  (1-rho)E[T_1]");
    for point in convergence_sweep(&index, &spec, &[0.9, 0.95, 0.99, 0.995, 0.999]) {
        let m = point.report?.measured;
        println!(
            "{:<8} {:.5}  {:.5}  {:.5}  {:.5}       {:.5}",
            point.rho,
            m.pi_saturated,
            m.omega[0],
            m.omega[1],
            m.scaled_l,
            m.scaled_eti[0].unwrap()
        );
    }
    println!(
        "limit    {:.5}  {:.5}  {:.5}  {:.5}       {:.5}",
        limit.pi_saturated,
        limit.omega[0],
        limit.omega[1],
        limit.scaled_l,
        limit.scaled_eti[0].unwrap()
    );

    let near = spec.with_rho(0.999)?;
    for u in [0.5, 1.0, 2.0] {
        let (got, want) = pgf_limit_check(&index, &near, 0, u)?;
        println!("class 1 marginal transform at u = {u}: {got:.5} (limit {want:.5})");
    }
    Ok(())
}
