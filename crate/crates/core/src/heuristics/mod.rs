//! Arrival-rate design: weight-proportional rates and min-max load.
//!
//! The min-max program minimizes `max_I α(I)/α(E(I))` over the probability
//! simplex. For fixed `t`, `{α ≥ 0, Σα = 1, α(I) ≤ t α(E(I))}` is a linear
//! feasibility problem, so the optimum is located by bisection on `t`. Each
//! feasibility problem is solved by constraint generation: a small simplex
//! over the constraints found so far, then a scan of every independent set
//! for the most violated one.

mod simplex;

use log::debug;

use crate::analytics::{self, scan_loads, PiTable, DENOMINATOR_EPSILON};
use crate::error::{Error, Result};
use crate::graph::{ClassSet, CompatibilityGraph, EnumerationLimits, IndependentSetIndex};
use crate::rates::RateVector;

use simplex::{find_feasible, FeasibilityProblem};

const VIOLATION_EPS: f64 = 1e-12;
const ROUND_OFF: f64 = 1e-13;
const NEGLIGIBLE_RATE: f64 = 1e-7;

/// Symmetric nonnegative weights with the support of the adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    a: Vec<f64>,
}

impl WeightMatrix {
    /// Validates `rows` against the graph: `a_ij > 0` iff `i ~ j`, zero
    /// diagonal, symmetric.
    pub fn new(graph: &CompatibilityGraph, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = graph.n_classes();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain(format!("weight matrix must be {n}x{n}")));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Domain(format!(
                        "weight ({}, {}) = {w} is not a finite nonnegative value",
                        i + 1,
                        j + 1
                    )));
                }
                if w != rows[j][i] {
                    return Err(Error::Domain(format!(
                        "weight matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if (w > 0.0) != graph.are_compatible(i, j) {
                    return Err(Error::Domain(format!(
                        "weight ({}, {}) = {w} does not match the adjacency of the graph",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(WeightMatrix {
            n,
            a: rows.into_iter().flatten().collect(),
        })
    }

    /// The 0/1 adjacency matrix.
    pub fn adjacency(graph: &CompatibilityGraph) -> Self {
        let n = graph.n_classes();
        let a = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| if graph.are_compatible(i, j) { 1.0 } else { 0.0 })
            .collect();
        WeightMatrix { n, a }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// `d_i = Σ_j a_ij`.
    pub fn weights(&self) -> Vec<f64> {
        self.a.chunks(self.n).map(|row| row.iter().sum()).collect()
    }
}

/// `α_i = d_i / Σ_j d_j`. Stable whenever the graph is connected and
/// non-bipartite.
pub fn weight_proportional_rates(
    graph: &CompatibilityGraph,
    weights: &WeightMatrix,
) -> Result<RateVector> {
    graph.require_stabilizable()?;
    if weights.n != graph.n_classes() {
        return Err(Error::Domain(
            "weight matrix size does not match the graph".into(),
        ));
    }
    RateVector::new(weights.weights())
}

/// Rates proportional to class degrees.
pub fn degree_proportional_rates(graph: &CompatibilityGraph) -> Result<RateVector> {
    weight_proportional_rates(graph, &WeightMatrix::adjacency(graph))
}

/// Knobs of the min-max-load optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Bisection stops once the bracket on the optimal value is this narrow.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Restrict the constraint family to sets of at most this cardinality.
    pub max_cardinality: Option<usize>,
    /// Cap on enumerated independent sets.
    pub set_cap: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            tolerance: 1e-9,
            max_iterations: 200,
            max_cardinality: None,
            set_cap: crate::graph::DEFAULT_SET_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub rates: RateVector,
    /// Max load at `rates` over the constraint family used by the optimizer,
    /// recomputed from the returned rates.
    pub achieved_max_load: f64,
    /// Upper end of the final bisection bracket.
    pub objective_bound: f64,
    /// Max load at the degree-proportional starting point, same family.
    pub initial_max_load: f64,
    pub iterations: usize,
    pub converged: bool,
    /// True when a cardinality restriction left some independent sets out.
    pub restricted: bool,
    /// Max load over every independent set, when that family is enumerable.
    pub full_max_load: Option<f64>,
}

impl OptimizationResult {
    /// The returned rates may be unstable: the full family could not be
    /// checked, or it was checked and some load reached one.
    pub fn stability_warning(&self) -> bool {
        self.full_max_load.is_none_or(|l| l >= 1.0)
    }
}

/// Solves the min-max-load program over all independent sets.
pub fn minimize_max_load(
    graph: &CompatibilityGraph,
    options: &OptimizerOptions,
) -> Result<OptimizationResult> {
    graph.require_stabilizable()?;
    let limits = EnumerationLimits {
        max_sets: options.set_cap,
        max_cardinality: options.max_cardinality,
    };
    let family = IndependentSetIndex::build(graph, limits)?;
    let start = degree_proportional_rates(graph)?;
    let (initial_max_load, _, _) = scan_loads(&family, start.as_slice());

    let n = graph.n_classes();
    let mut lo = 0.0;
    let mut hi = initial_max_load;
    let mut best = start.as_slice().to_vec();
    let mut iterations = 0;
    let mut active: Vec<usize> = family
        .nonempty_positions()
        .filter(|&p| family.set(p).len() == 1)
        .collect();
    while hi - lo > options.tolerance && iterations < options.max_iterations {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        match feasible_at(&family, n, mid, &mut active) {
            Some(point) => {
                hi = mid;
                best = point;
            }
            None => lo = mid,
        }
    }
    let converged = hi - lo <= options.tolerance;
    debug!(
        "min-max load bracket [{lo}, {hi}] after {iterations} iterations, {} active constraints",
        active.len()
    );

    let mut rates = RateVector::new(best)?;
    let mut achieved_max_load = max_load_via_analytics(graph, &family, &rates);
    // Near-zero rates make their loads ill-conditioned; drop them when that
    // does not hurt.
    let top = rates.as_slice().iter().copied().fold(0.0, f64::max);
    let trimmed: Vec<f64> = rates
        .as_slice()
        .iter()
        .map(|&x| if x < NEGLIGIBLE_RATE * top { 0.0 } else { x })
        .collect();
    if let Ok(candidate) = RateVector::new(trimmed) {
        let load = max_load_via_analytics(graph, &family, &candidate);
        if load <= achieved_max_load {
            rates = candidate;
            achieved_max_load = load;
        }
    }
    let full_max_load = if family.is_truncated() {
        IndependentSetIndex::build(graph, EnumerationLimits::with_cap(options.set_cap))
            .ok()
            .map(|full| max_load_via_analytics(graph, &full, &rates))
    } else {
        Some(achieved_max_load)
    };
    Ok(OptimizationResult {
        rates,
        achieved_max_load,
        objective_bound: hi,
        initial_max_load,
        iterations,
        converged,
        restricted: family.is_truncated(),
        full_max_load,
    })
}

/// Same program restricted to independent sets of at most `max_cardinality`
/// classes.
pub fn restricted_minimize_max_load(
    graph: &CompatibilityGraph,
    max_cardinality: usize,
    options: &OptimizerOptions,
) -> Result<OptimizationResult> {
    let options = OptimizerOptions {
        max_cardinality: Some(max_cardinality),
        ..*options
    };
    minimize_max_load(graph, &options)
}

fn max_load_via_analytics(
    graph: &CompatibilityGraph,
    family: &IndependentSetIndex,
    rates: &RateVector,
) -> f64 {
    family
        .sets()
        .iter()
        .filter(|s| rates.of(**s) > 0.0)
        .map(|&s| analytics::load(graph, rates, s).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Constraint generation for `{α ≥ 0, Σα = 1, α(I) − t α(E(I)) ≤ 0}`.
fn feasible_at(
    family: &IndependentSetIndex,
    n: usize,
    t: f64,
    active: &mut Vec<usize>,
) -> Option<Vec<f64>> {
    let eq_rows = vec![vec![1.0; n]];
    loop {
        let rows: Vec<Vec<f64>> = active
            .iter()
            .map(|&p| constraint_row(family, n, t, p))
            .collect();
        let rhs = vec![0.0; rows.len()];
        let mut point = find_feasible(&FeasibilityProblem {
            n_vars: n,
            ub_rows: &rows,
            ub_rhs: &rhs,
            eq_rows: &eq_rows,
            eq_rhs: &[1.0],
        })?;
        // Round-off rates would otherwise face an all-zero neighborhood.
        for x in point.iter_mut().filter(|x| **x < ROUND_OFF) {
            *x = 0.0;
        }
        let worst = family
            .nonempty_positions()
            .map(|p| {
                let excess = family.set(p).sum(&point) - t * family.neighbors(p).sum(&point);
                (p, excess)
            })
            .filter(|(_, excess)| *excess > VIOLATION_EPS)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            None => return Some(point),
            Some((p, _)) => {
                if active.contains(&p) {
                    // Rounding in the tableau; accept the point.
                    return Some(point);
                }
                active.push(p);
            }
        }
    }
}

fn constraint_row(family: &IndependentSetIndex, n: usize, t: f64, pos: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    for i in family.set(pos) {
        row[i] += 1.0;
    }
    for j in family.neighbors(pos) {
        row[j] -= t;
    }
    row
}

/// `ψ` through the load form
/// `ψ(I) = ρ(I)/(1−ρ(I)) · Σ_{i∈I} (α_i/α(I)) ψ(I∖{i})`.
pub fn psi_load_form(index: &IndependentSetIndex, alpha: &RateVector) -> Result<Vec<f64>> {
    let a = alpha.as_slice();
    let mut psi = vec![0.0; index.len()];
    psi[0] = 1.0;
    for pos in index.nonempty_positions() {
        let set = index.set(pos);
        let inflow = set.sum(a);
        if inflow == 0.0 {
            continue;
        }
        let rho = load_at(index, a, pos)?;
        let mix: f64 = index
            .removals(pos)
            .iter()
            .map(|&(i, prev)| a[i] / inflow * psi[prev])
            .sum();
        psi[pos] = rho / (1.0 - rho) * mix;
    }
    Ok(psi)
}

/// `L` through the load form
/// `L(I)π(I) = π(I)/(1−ρ(I)) + ρ(I)/(1−ρ(I)) · Σ_{i∈I} (α_i/α(I)) L(I∖{i})π(I∖{i})`.
pub fn mean_unmatched_total_load_form(
    index: &IndependentSetIndex,
    alpha: &RateVector,
    pi: &PiTable,
) -> Result<f64> {
    let a = alpha.as_slice();
    let mut weighted = vec![0.0; index.len()];
    for pos in index.nonempty_positions() {
        let inflow = index.set(pos).sum(a);
        if inflow == 0.0 {
            continue;
        }
        let rho = load_at(index, a, pos)?;
        let mix: f64 = index
            .removals(pos)
            .iter()
            .map(|&(i, prev)| a[i] / inflow * weighted[prev])
            .sum();
        weighted[pos] = pi.values[pos] / (1.0 - rho) + rho / (1.0 - rho) * mix;
    }
    Ok(weighted.iter().sum())
}

fn load_at(index: &IndependentSetIndex, a: &[f64], pos: usize) -> Result<f64> {
    let set = index.set(pos);
    let inflow = set.sum(a);
    let outflow = index.neighbors(pos).sum(a);
    if outflow - inflow <= DENOMINATOR_EPSILON {
        return Err(Error::Unstable {
            set,
            load: if outflow > 0.0 {
                inflow / outflow
            } else {
                f64::INFINITY
            },
            denominator: outflow - inflow,
        });
    }
    Ok(inflow / outflow)
}

/// Normalizes a load-form `ψ` vector into a stationary distribution.
pub fn pi_from_load_form(psi: &[f64]) -> PiTable {
    let total: f64 = psi.iter().sum();
    PiTable {
        values: psi.iter().map(|v| v / total).collect(),
    }
}

/// Loads of every independent set in `index` at `alpha`, skipping sets that
/// never receive arrivals.
pub fn loads(index: &IndependentSetIndex, alpha: &RateVector) -> Vec<(ClassSet, f64)> {
    let a = alpha.as_slice();
    index
        .nonempty_positions()
        .filter(|&p| index.set(p).sum(a) > 0.0)
        .map(|p| {
            let out = index.neighbors(p).sum(a);
            let rho = if out > 0.0 {
                index.set(p).sum(a) / out
            } else {
                f64::INFINITY
            };
            (index.set(p), rho)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{compute_psi, mean_unmatched_total, pi_table};

    fn paw() -> CompatibilityGraph {
        CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn degree_proportional_examples() {
        let r = degree_proportional_rates(&paw()).unwrap();
        assert_eq!(r.as_slice(), &[0.25, 0.25, 0.375, 0.125]);
        let tri = degree_proportional_rates(&CompatibilityGraph::complete(3).unwrap()).unwrap();
        assert!(tri.max_abs_diff(&[1.0 / 3.0; 3]) < 1e-15);
        let c9 = degree_proportional_rates(&CompatibilityGraph::cycle(9).unwrap()).unwrap();
        assert!(c9.max_abs_diff(&[1.0 / 9.0; 9]) < 1e-15);
    }

    #[test]
    fn weight_matrix_validation() {
        let g = paw();
        let mut rows = vec![vec![0.0; 4]; 4];
        rows[0][1] = 1.0;
        rows[1][0] = 1.0;
        assert!(WeightMatrix::new(&g, rows.clone()).is_err());
        for (i, j) in g.edges() {
            rows[i][j] = 2.0;
            rows[j][i] = 2.0;
        }
        assert!(WeightMatrix::new(&g, rows.clone()).is_ok());
        rows[0][1] = 3.0;
        assert!(WeightMatrix::new(&g, rows).is_err());
    }

    #[test]
    fn rejects_bipartite_graphs() {
        let path = CompatibilityGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(degree_proportional_rates(&path).is_err());
        assert!(minimize_max_load(&path, &OptimizerOptions::default()).is_err());
    }

    #[test]
    fn paw_minmax_solution() {
        let result = minimize_max_load(&paw(), &OptimizerOptions::default()).unwrap();
        assert!(result.converged);
        assert!(
            result
                .rates
                .max_abs_diff(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0])
                < 1e-4
        );
        assert!(result.achieved_max_load <= 0.5 + 1e-6);
        assert!((result.achieved_max_load - result.objective_bound).abs() < 1e-8);
        assert!(result.achieved_max_load <= result.initial_max_load);
    }

    #[test]
    fn triangle_minmax_is_uniform() {
        let tri = CompatibilityGraph::complete(3).unwrap();
        let result = minimize_max_load(&tri, &OptimizerOptions::default()).unwrap();
        assert!(result.rates.max_abs_diff(&[1.0 / 3.0; 3]) < 1e-4);
        assert!((result.achieved_max_load - 0.5).abs() < 1e-6);
    }

    #[test]
    fn restricted_family() {
        let g = paw();
        let opts = OptimizerOptions::default();
        let full = minimize_max_load(&g, &opts).unwrap();
        let two = restricted_minimize_max_load(&g, 2, &opts).unwrap();
        assert!(!two.restricted);
        assert!(two.rates.max_abs_diff(full.rates.as_slice()) < 1e-6);
        let one = restricted_minimize_max_load(&g, 1, &opts).unwrap();
        assert!(one.restricted);
        assert!(one.achieved_max_load <= full.achieved_max_load + 1e-9);
        assert!(one.full_max_load.is_some());
    }

    #[test]
    fn load_form_matches_direct_recursion() {
        let g = CompatibilityGraph::cycle(9).unwrap();
        let index = g.independent_sets().unwrap();
        let alpha = RateVector::new((1..=9).map(|k| 1.0 + 0.05 * k as f64).collect()).unwrap();
        let direct = compute_psi(&index, &alpha).unwrap();
        let load_form = psi_load_form(&index, &alpha).unwrap();
        for (pos, v) in load_form.iter().enumerate() {
            assert!((direct.value(pos) - v).abs() <= 1e-12 * v.max(1.0));
        }
        let pi = pi_table(&direct);
        let l_direct = mean_unmatched_total(&index, &alpha, &pi).unwrap();
        let l_load = mean_unmatched_total_load_form(&index, &alpha, &pi).unwrap();
        assert!((l_direct - l_load).abs() <= 1e-12 * l_direct);
    }
}
