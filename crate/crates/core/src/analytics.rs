//! Exact stationary metrics by dynamic programming over independent sets.
//!
//! Every recursion walks the [`IndependentSetIndex`] in cardinality order, so
//! a set's value only depends on entries at smaller positions. The overall
//! cost is `O(M N)` for `M` independent sets and `N` classes, except the
//! per-class mean counts which cost `O(M N)` per class.

use crate::error::{Error, GraphDefect, Result};
use crate::graph::{ClassSet, CompatibilityGraph, IndependentSetIndex};
use crate::rates::RateVector;

/// Denominators `μ(E(I)) − λ(I)` at or below this value are treated as
/// instability.
pub const DENOMINATOR_EPSILON: f64 = 1e-12;

/// Above this maximum load, [`compute_psi`] switches to log-domain
/// accumulation.
pub const LOG_DOMAIN_LOAD: f64 = 0.999;

/// `ρ(I) = α(I) / α(E(I))`.
pub fn load(graph: &CompatibilityGraph, alpha: &RateVector, set: ClassSet) -> Result<f64> {
    let denominator = alpha.of(graph.neighbors_of_set(set));
    if denominator <= 0.0 {
        return Err(Error::DegenerateDenominator(set));
    }
    Ok(alpha.of(set) / denominator)
}

/// Outcome of the stability check.
///
/// `stable` holds iff the graph is stabilizable, `violations` is empty and
/// `max_load < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    /// Set when the graph itself rules out stability.
    pub graph_defect: Option<GraphDefect>,
    /// Independent sets with `α(I) ≥ α(E(I))`, and their load.
    pub violations: Vec<(ClassSet, f64)>,
    pub max_load: f64,
    pub argmax_set: ClassSet,
}

/// Checks `α(I) < α(E(I))` over every independent set with `α(I) > 0`.
pub fn check_stability(graph: &CompatibilityGraph, alpha: &RateVector) -> Result<StabilityReport> {
    let index = graph.independent_sets()?;
    Ok(check_stability_with(graph, &index, alpha))
}

/// Same as [`check_stability`] with a prebuilt index.
pub fn check_stability_with(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    alpha: &RateVector,
) -> StabilityReport {
    let class = graph.classify();
    let graph_defect = if !class.connected {
        Some(GraphDefect::Disconnected)
    } else if class.bipartite {
        Some(GraphDefect::Bipartite)
    } else {
        None
    };
    let (max_load, argmax_set, violations) = scan_loads(index, alpha.as_slice());
    StabilityReport {
        stable: graph_defect.is_none() && violations.is_empty(),
        graph_defect,
        violations,
        max_load,
        argmax_set,
    }
}

/// Maximum load over the indexed sets with positive rate, and the sets whose
/// load is at least one.
pub(crate) fn scan_loads(
    index: &IndependentSetIndex,
    alpha: &[f64],
) -> (f64, ClassSet, Vec<(ClassSet, f64)>) {
    let mut max_load = 0.0;
    let mut argmax = ClassSet::EMPTY;
    let mut violations = Vec::new();
    for pos in index.nonempty_positions() {
        let set = index.set(pos);
        let inflow = set.sum(alpha);
        if inflow <= 0.0 {
            continue;
        }
        let outflow = index.neighbors(pos).sum(alpha);
        let rho = if outflow > 0.0 {
            inflow / outflow
        } else {
            f64::INFINITY
        };
        if inflow >= outflow {
            violations.push((set, rho));
        }
        if rho > max_load || argmax.is_empty() {
            max_load = rho;
            argmax = set;
        }
    }
    (max_load, argmax, violations)
}

/// Arithmetic domain used for the `ψ` recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    /// Values stored as natural logarithms; zero is `-inf`.
    Log,
}

/// Unnormalized stationary measure `ψ(I) = π(I)/π(∅)`, aligned with the index.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    scale: Scale,
    values: Vec<f64>,
}

impl PsiTable {
    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ψ` at an index position, in linear scale (may overflow to `inf` for a
    /// log-domain table).
    pub fn value(&self, pos: usize) -> f64 {
        match self.scale {
            Scale::Linear => self.values[pos],
            Scale::Log => self.values[pos].exp(),
        }
    }

    /// `ln ψ` at an index position.
    pub fn ln(&self, pos: usize) -> f64 {
        match self.scale {
            Scale::Linear => self.values[pos].ln(),
            Scale::Log => self.values[pos],
        }
    }

    pub fn linear_values(&self) -> Vec<f64> {
        (0..self.values.len()).map(|p| self.value(p)).collect()
    }

    /// `ln Σ_I ψ(I)`.
    pub fn ln_total(&self) -> f64 {
        match self.scale {
            Scale::Linear => self.values.iter().sum::<f64>().ln(),
            Scale::Log => log_sum_exp(self.values.iter().copied()),
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn psi_recursion(
    index: &IndependentSetIndex,
    lambda: &[f64],
    mu: &[f64],
    scale: Scale,
) -> Result<PsiTable> {
    let zero = match scale {
        Scale::Linear => 0.0,
        Scale::Log => f64::NEG_INFINITY,
    };
    let mut values = vec![zero; index.len()];
    values[0] = match scale {
        Scale::Linear => 1.0,
        Scale::Log => 0.0,
    };
    let mut terms = Vec::new();
    for pos in index.nonempty_positions() {
        let set = index.set(pos);
        let inflow = set.sum(lambda);
        if inflow == 0.0 {
            continue;
        }
        let denominator = index.neighbors(pos).sum(mu) - inflow;
        if denominator <= DENOMINATOR_EPSILON {
            return Err(unstable(set, inflow, inflow + denominator, denominator));
        }
        values[pos] = match scale {
            Scale::Linear => {
                index
                    .removals(pos)
                    .iter()
                    .map(|&(i, prev)| lambda[i] * values[prev])
                    .sum::<f64>()
                    / denominator
            }
            Scale::Log => {
                terms.clear();
                terms.extend(
                    index
                        .removals(pos)
                        .iter()
                        .filter(|&&(i, _)| lambda[i] > 0.0)
                        .map(|&(i, prev)| lambda[i].ln() + values[prev]),
                );
                log_sum_exp(terms.iter().copied()) - denominator.ln()
            }
        };
    }
    Ok(PsiTable { scale, values })
}

fn unstable(set: ClassSet, inflow: f64, outflow: f64, denominator: f64) -> Error {
    Error::Unstable {
        set,
        load: if outflow > 0.0 {
            inflow / outflow
        } else {
            f64::INFINITY
        },
        denominator,
    }
}

/// `ψ` by the recursion `ψ(I) = Σ_{i∈I} α_i ψ(I∖{i}) / (α(E(I)) − α(I))`,
/// `ψ(∅) = 1`. Switches to log-domain accumulation when some load exceeds
/// [`LOG_DOMAIN_LOAD`].
pub fn compute_psi(index: &IndependentSetIndex, alpha: &RateVector) -> Result<PsiTable> {
    let (max_load, _, _) = scan_loads(index, alpha.as_slice());
    let scale = if max_load > LOG_DOMAIN_LOAD {
        Scale::Log
    } else {
        Scale::Linear
    };
    compute_psi_scaled(index, alpha, scale)
}

pub fn compute_psi_scaled(
    index: &IndependentSetIndex,
    alpha: &RateVector,
    scale: Scale,
) -> Result<PsiTable> {
    psi_recursion(index, alpha.as_slice(), alpha.as_slice(), scale)
}

/// `ψ_{λ,μ}` by `ψ(I) = Σ_{i∈I} λ_i ψ(I∖{i}) / (μ(E(I)) − λ(I))`, `ψ(∅) = 1`.
///
/// Requires `λ(I) < μ(E(I))` on every set with `λ(I) > 0`.
pub fn psi_general(index: &IndependentSetIndex, lambda: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    psi_general_scaled(index, lambda, mu, Scale::Linear).map(|t| t.values)
}

pub fn psi_general_scaled(
    index: &IndependentSetIndex,
    lambda: &[f64],
    mu: &[f64],
    scale: Scale,
) -> Result<PsiTable> {
    let n = index.n_classes();
    for (name, v) in [("lambda", lambda), ("mu", mu)] {
        if v.len() != n || v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain(format!(
                "{name} must hold {n} finite nonnegative values"
            )));
        }
    }
    psi_recursion(index, lambda, mu, scale).map_err(|e| match e {
        Error::Unstable { set, load, .. } => Error::Domain(format!(
            "lambda({set}) = {:.6} times mu(E({set})) violates lambda(I) < mu(E(I))",
            load
        )),
        other => other,
    })
}

/// Stationary distribution of the set of unmatched classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiTable {
    /// `π(I)` aligned with the index; entry 0 is `π(∅)`.
    pub values: Vec<f64>,
}

impl PiTable {
    pub fn empty(&self) -> f64 {
        self.values[0]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// `π(∅) = 1/Σ ψ(I)` and `π(I) = ψ(I) π(∅)`.
pub fn pi_table(psi: &PsiTable) -> PiTable {
    let ln_total = psi.ln_total();
    let values = match psi.scale {
        Scale::Linear => {
            let total: f64 = psi.values.iter().sum();
            psi.values.iter().map(|v| v / total).collect()
        }
        Scale::Log => psi.values.iter().map(|v| (v - ln_total).exp()).collect(),
    };
    PiTable { values }
}

/// `ω_i = Σ_{I: i ∉ E(I)} π(I)`, the probability that an arriving class-`i`
/// item finds no compatible item.
pub fn waiting_probabilities(index: &IndependentSetIndex, pi: &PiTable) -> Vec<f64> {
    let n = index.n_classes();
    let mut omega = vec![0.0; n];
    for (pos, &p) in pi.values.iter().enumerate() {
        let blocked = index.neighbors(pos);
        for (i, w) in omega.iter_mut().enumerate() {
            if !blocked.contains(i) {
                *w += p;
            }
        }
    }
    omega
}

fn denominator(index: &IndependentSetIndex, alpha: &[f64], pos: usize) -> Result<f64> {
    let set = index.set(pos);
    let inflow = set.sum(alpha);
    let outflow = index.neighbors(pos).sum(alpha);
    let d = outflow - inflow;
    if d <= DENOMINATOR_EPSILON {
        return Err(unstable(set, inflow, outflow, d));
    }
    Ok(d)
}

/// `L_i` for every class via the recursion on `L_i(I)π(I)`.
pub fn mean_unmatched_per_class(
    index: &IndependentSetIndex,
    alpha: &RateVector,
    pi: &PiTable,
) -> Result<Vec<f64>> {
    let a = alpha.as_slice();
    let n = index.n_classes();
    let mut denominators = vec![0.0; index.len()];
    for pos in index.nonempty_positions() {
        if index.set(pos).sum(a) > 0.0 {
            denominators[pos] = denominator(index, a, pos)?;
        }
    }
    let mut weighted = vec![0.0; index.len()];
    let mut result = Vec::with_capacity(n);
    for class in 0..n {
        let mut total = 0.0;
        weighted.iter_mut().for_each(|w| *w = 0.0);
        for pos in index.nonempty_positions() {
            let set = index.set(pos);
            if !set.contains(class) || denominators[pos] == 0.0 {
                continue;
            }
            let mut numerator = 0.0;
            for &(j, prev) in index.removals(pos) {
                if j == class {
                    numerator += a[class] * (pi.values[pos] + pi.values[prev]);
                } else {
                    numerator += a[j] * weighted[prev];
                }
            }
            weighted[pos] = numerator / denominators[pos];
            total += weighted[pos];
        }
        result.push(total);
    }
    Ok(result)
}

/// `L` via the recursion on `L(I)π(I)`, independently of the per-class route.
pub fn mean_unmatched_total(
    index: &IndependentSetIndex,
    alpha: &RateVector,
    pi: &PiTable,
) -> Result<f64> {
    let a = alpha.as_slice();
    let mut weighted = vec![0.0; index.len()];
    let mut total = 0.0;
    for pos in index.nonempty_positions() {
        if index.set(pos).sum(a) == 0.0 {
            continue;
        }
        let d = denominator(index, a, pos)?;
        let outflow = index.neighbors(pos).sum(a);
        let carried: f64 = index
            .removals(pos)
            .iter()
            .map(|&(i, prev)| a[i] * weighted[prev])
            .sum();
        weighted[pos] = (outflow * pi.values[pos] + carried) / d;
        total += weighted[pos];
    }
    Ok(total)
}

/// Little's law: `E[T_i] = L_i/α_i` (undefined when `α_i = 0`) and `E[T] = L`.
pub fn mean_matching_times(alpha: &RateVector, li: &[f64], l: f64) -> (Vec<Option<f64>>, f64) {
    let per_class = li
        .iter()
        .zip(alpha.as_slice())
        .map(|(&l_i, &a)| (a > 0.0).then(|| l_i / a))
        .collect();
    (per_class, l)
}

/// Joint probability generating function of the unmatched counts,
/// `g_X(z) = Σ ψ_{αz,α}(I) / Σ ψ_{α,α}(I)`, for `z ∈ [0,1]^N`.
pub fn evaluate_pgf(index: &IndependentSetIndex, alpha: &RateVector, z: &[f64]) -> Result<f64> {
    if z.len() != index.n_classes() || z.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Domain(format!(
            "z must hold {} values in [0, 1]",
            index.n_classes()
        )));
    }
    let a = alpha.as_slice();
    let scaled: Vec<f64> = a.iter().zip(z).map(|(x, y)| x * y).collect();
    let denominator = compute_psi(index, alpha)?;
    let numerator = psi_recursion(index, &scaled, a, denominator.scale())?;
    Ok((numerator.ln_total() - denominator.ln_total()).exp())
}

/// Laplace–Stieltjes transform of the class-`i` matching time at `u`,
/// obtained from the generating function with `z_i = 1 − u/α_i`. Only
/// defined for `0 ≤ u ≤ α_i`.
pub fn lst_matching_time(
    index: &IndependentSetIndex,
    alpha: &RateVector,
    class: usize,
    u: f64,
) -> Result<f64> {
    if class >= index.n_classes() {
        return Err(Error::ClassOutOfRange {
            index: class,
            n: index.n_classes(),
        });
    }
    let a = alpha[class];
    if a <= 0.0 {
        return Err(Error::Domain(format!(
            "class {} has zero arrival rate",
            class + 1
        )));
    }
    if !(0.0..=a).contains(&u) {
        return Err(Error::Domain(format!(
            "u = {u} lies outside [0, {a}] for class {}",
            class + 1
        )));
    }
    let mut z = vec![1.0; index.n_classes()];
    z[class] = (1.0 - u / a).max(0.0);
    evaluate_pgf(index, alpha, &z)
}

/// Every stationary metric for one rate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub psi: PsiTable,
    pub pi: PiTable,
    pub pi_empty: f64,
    /// Waiting probability per class.
    pub omega: Vec<f64>,
    /// Mean number of unmatched items per class.
    pub li: Vec<f64>,
    /// Mean number of unmatched items, all classes.
    pub l: f64,
    /// Mean matching time per class; `None` for classes that never arrive.
    pub eti: Vec<Option<f64>>,
    /// Overall mean matching time (equal to `l`).
    pub et: f64,
}

impl MetricsTable {
    pub fn compute(index: &IndependentSetIndex, alpha: &RateVector) -> Result<Self> {
        if alpha.len() != index.n_classes() {
            return Err(Error::InvalidRates(format!(
                "expected {} rates, got {}",
                index.n_classes(),
                alpha.len()
            )));
        }
        let psi = compute_psi(index, alpha)?;
        let pi = pi_table(&psi);
        let omega = waiting_probabilities(index, &pi);
        let li = mean_unmatched_per_class(index, alpha, &pi)?;
        let l = mean_unmatched_total(index, alpha, &pi)?;
        let (eti, et) = mean_matching_times(alpha, &li, l);
        Ok(MetricsTable {
            pi_empty: pi.empty(),
            psi,
            pi,
            omega,
            li,
            l,
            eti,
            et,
        })
    }

    /// `Σ_i α_i ω_i`, which equals 1/2 for every stable instance.
    pub fn mean_waiting_probability(&self, alpha: &RateVector) -> f64 {
        self.omega
            .iter()
            .zip(alpha.as_slice())
            .map(|(w, a)| w * a)
            .sum()
    }
}

/// Refuses unsupported graphs, enumerates the independent sets and computes
/// every metric.
pub fn analyze(graph: &CompatibilityGraph, alpha: &RateVector) -> Result<MetricsTable> {
    graph.require_stabilizable()?;
    let index = graph.independent_sets()?;
    MetricsTable::compute(&index, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paw() -> CompatibilityGraph {
        CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)]).unwrap()
    }

    fn triangle() -> CompatibilityGraph {
        CompatibilityGraph::complete(3).unwrap()
    }

    fn third_rates() -> RateVector {
        RateVector::new(vec![1.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn load_examples() {
        let g = paw();
        let deg = RateVector::new(vec![2.0, 2.0, 3.0, 1.0]).unwrap();
        assert!(close(
            load(&g, &deg, ClassSet::from([3])).unwrap(),
            1.0 / 3.0,
            1e-15
        ));
        let tri = triangle();
        assert!(close(
            load(&tri, &RateVector::uniform(3), ClassSet::from([0])).unwrap(),
            0.5,
            1e-15
        ));
        assert!(close(
            load(&g, &third_rates(), ClassSet::from([0, 3])).unwrap(),
            0.5,
            1e-15
        ));
    }

    #[test]
    fn load_with_zero_neighborhood_rate() {
        let g = paw();
        let alpha = RateVector::new(vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            load(&g, &alpha, ClassSet::from([3])),
            Err(Error::DegenerateDenominator(ClassSet::from([3])))
        );
    }

    #[test]
    fn stability_examples() {
        let g = paw();
        let deg = RateVector::new(vec![2.0, 2.0, 3.0, 1.0]).unwrap();
        let report = check_stability(&g, &deg).unwrap();
        assert!(report.stable);
        assert!(report.max_load < 1.0);

        let edge = CompatibilityGraph::new(2, &[(0, 1)]).unwrap();
        let report = check_stability(&edge, &RateVector::uniform(2)).unwrap();
        assert!(!report.stable);
        assert_eq!(report.graph_defect, Some(GraphDefect::Bipartite));
        assert_eq!(report.violations.len(), 2);

        let report = check_stability(&triangle(), &RateVector::uniform(3)).unwrap();
        assert!(report.stable);
        assert!(close(report.max_load, 0.5, 1e-15));
    }

    #[test]
    fn overloaded_set_is_reported() {
        let g = paw();
        let alpha = RateVector::new(vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        let report = check_stability(&g, &alpha).unwrap();
        assert!(!report.stable);
        assert_eq!(report.argmax_set, ClassSet::from([3]));
        let index = g.independent_sets().unwrap();
        assert!(matches!(
            compute_psi(&index, &alpha),
            Err(Error::Unstable { set, .. }) if set == ClassSet::from([3])
        ));
    }

    #[test]
    fn triangle_uniform_hand_values() {
        let index = triangle().independent_sets().unwrap();
        let m = MetricsTable::compute(&index, &RateVector::uniform(3)).unwrap();
        for pos in 0..index.len() {
            assert!(close(m.psi.value(pos), 1.0, 1e-15));
            assert!(close(m.pi.values[pos], 0.25, 1e-15));
        }
        for i in 0..3 {
            assert!(close(m.omega[i], 0.5, 1e-15));
            assert!(close(m.li[i], 0.5, 1e-14));
            assert!(close(m.eti[i].unwrap(), 1.5, 1e-14));
        }
        assert!(close(m.l, 1.5, 1e-14));
    }

    #[test]
    fn paw_optimum_hand_values() {
        let index = paw().independent_sets().unwrap();
        let m = MetricsTable::compute(&index, &third_rates()).unwrap();
        let psi = m.psi.linear_values();
        assert_eq!(psi, vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(close(m.pi_empty, 0.25, 1e-15));
        assert!(close(m.omega[3], 0.75, 1e-15));
        assert_eq!(m.li[3], 0.0);
        assert!(close(m.l, 1.5, 1e-14));
        assert!(m.eti[3].is_none());
        assert!(close(m.et, 1.5, 1e-14));
    }

    #[test]
    fn paw_degree_proportional_values() {
        let index = paw().independent_sets().unwrap();
        let alpha = RateVector::new(vec![2.0, 2.0, 3.0, 1.0]).unwrap();
        let m = MetricsTable::compute(&index, &alpha).unwrap();
        assert!(close(m.pi_empty, 0.17, 0.005), "{}", m.pi_empty);
        assert!(close(m.l, 2.25, 0.01), "{}", m.l);
    }

    #[test]
    fn psi_general_examples() {
        let index = triangle().independent_sets().unwrap();
        let third = vec![1.0 / 3.0; 3];
        let sixth = vec![1.0 / 6.0; 3];
        let psi = psi_general(&index, &sixth, &third).unwrap();
        for v in &psi[1..] {
            assert!(close(*v, 1.0 / 3.0, 1e-15));
        }
        let zero = psi_general(&index, &[0.0; 3], &third).unwrap();
        assert_eq!(zero, vec![1.0, 0.0, 0.0, 0.0]);
        let same = psi_general(&index, &third, &third).unwrap();
        let alpha = RateVector::uniform(3);
        assert_eq!(same, compute_psi(&index, &alpha).unwrap().linear_values());
        assert!(matches!(
            psi_general(&index, &[1.0; 3], &third),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pgf_boundary_values() {
        let index = paw().independent_sets().unwrap();
        let alpha = RateVector::new(vec![2.0, 2.0, 3.0, 1.0]).unwrap();
        let m = MetricsTable::compute(&index, &alpha).unwrap();
        assert!(close(
            evaluate_pgf(&index, &alpha, &[1.0; 4]).unwrap(),
            1.0,
            1e-12
        ));
        assert!(close(
            evaluate_pgf(&index, &alpha, &[0.0; 4]).unwrap(),
            m.pi_empty,
            1e-12
        ));
        assert!(evaluate_pgf(&index, &alpha, &[1.1, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn lst_domain() {
        let index = triangle().independent_sets().unwrap();
        let alpha = RateVector::uniform(3);
        assert!(close(
            lst_matching_time(&index, &alpha, 0, 0.0).unwrap(),
            1.0,
            1e-12
        ));
        assert!(lst_matching_time(&index, &alpha, 0, 0.34).is_err());
        assert!(lst_matching_time(&index, &alpha, 0, -0.1).is_err());
        // u = α_i gives P(X_i = 0) = 1 − π({i}) on the triangle.
        let at_end = lst_matching_time(&index, &alpha, 0, 1.0 / 3.0).unwrap();
        assert!(close(at_end, 0.75, 1e-12));
    }

    #[test]
    fn log_domain_agrees_with_linear() {
        let g = CompatibilityGraph::cycle(9).unwrap();
        let index = g.independent_sets().unwrap();
        let alpha = RateVector::new((1..=9).map(|k| 1.0 + 0.1 * k as f64).collect()).unwrap();
        let lin = compute_psi_scaled(&index, &alpha, Scale::Linear).unwrap();
        let log = compute_psi_scaled(&index, &alpha, Scale::Log).unwrap();
        for pos in 0..index.len() {
            let (a, b) = (lin.value(pos), log.value(pos));
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
        let (pl, pg) = (pi_table(&lin), pi_table(&log));
        for (a, b) in pl.values.iter().zip(&pg.values) {
            assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn analyze_refuses_bipartite_graphs() {
        let edge = CompatibilityGraph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(
            analyze(&edge, &RateVector::uniform(2)),
            Err(Error::UnsupportedGraph(GraphDefect::Bipartite))
        );
    }
}
