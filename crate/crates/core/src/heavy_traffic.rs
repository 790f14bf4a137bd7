//! Heavy-traffic regime in which one maximal independent set saturates.
//!
//! Classes of the saturated set `I` arrive at rate `p_i ρ/(1+ρ)` and the
//! others at `q_i/(1+ρ)`. As `ρ ↑ 1` the buffer concentrates on `I`, the
//! scaled counts `(1−ρ)X_i` become exponential with mean `p_i` and the scaled
//! matching times `(1−ρ)T_i` exponential with mean 2.

use rayon::prelude::*;

use crate::analytics::{self, MetricsTable};
use crate::error::{Error, Result};
use crate::graph::{ClassSet, CompatibilityGraph, IndependentSetIndex};
use crate::rates::RateVector;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    saturated: ClassSet,
    /// Full-length mixing weights: `p` on the saturated set, `q` elsewhere.
    weights: Vec<f64>,
    rho: f64,
}

impl ScalingSpec {
    /// `p` lists the weights of the saturated classes and `q` those of the
    /// remaining classes, both in increasing class order.
    pub fn new(
        graph: &CompatibilityGraph,
        saturated: ClassSet,
        p: &[f64],
        q: &[f64],
        rho: f64,
    ) -> Result<Self> {
        let n = graph.n_classes();
        if !graph.is_maximal_independent(saturated) {
            return Err(Error::Domain(format!(
                "saturated set {saturated} is not a maximal independent set; \
                 only maximal sets are supported"
            )));
        }
        if p.len() != saturated.len() || q.len() != n - saturated.len() {
            return Err(Error::Domain(format!(
                "expected {} saturated and {} other weights, got {} and {}",
                saturated.len(),
                n - saturated.len(),
                p.len(),
                q.len()
            )));
        }
        check_simplex("p", p)?;
        check_simplex("q", q)?;
        let mut weights = vec![0.0; n];
        let (mut pi, mut qi) = (p.iter(), q.iter());
        for (class, w) in weights.iter_mut().enumerate() {
            *w = if saturated.contains(class) {
                *pi.next().unwrap()
            } else {
                *qi.next().unwrap()
            };
        }
        let spec = ScalingSpec {
            saturated,
            weights,
            rho: 0.5,
        };
        spec.with_rho(rho)
    }

    /// Uniform `p` and `q`.
    pub fn uniform(graph: &CompatibilityGraph, saturated: ClassSet, rho: f64) -> Result<Self> {
        let k = saturated.len().max(1);
        let rest = graph.n_classes().saturating_sub(saturated.len()).max(1);
        let p = vec![1.0 / k as f64; saturated.len()];
        let q = vec![1.0 / rest as f64; graph.n_classes() - saturated.len()];
        ScalingSpec::new(graph, saturated, &p, &q, rho)
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("rho = {rho} must lie in (0, 1)")));
        }
        Ok(ScalingSpec {
            rho,
            ..self.clone()
        })
    }

    pub fn saturated(&self) -> ClassSet {
        self.saturated
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    /// `p_i` for saturated classes, `0` elsewhere.
    pub fn p(&self, class: usize) -> f64 {
        if self.saturated.contains(class) {
            self.weights[class]
        } else {
            0.0
        }
    }

    /// Rates at `ρ = 1`: `p_i/2` on the saturated set, `q_i/2` elsewhere.
    pub fn limiting_rates(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / 2.0).collect()
    }
}

fn check_simplex(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain(format!("{name} must be nonnegative")));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::Domain(format!("{name} sums to {total}, expected 1")));
    }
    Ok(())
}

/// Arrival rates of the scaling at `spec.rho()`.
pub fn scaled_rates(spec: &ScalingSpec) -> Result<RateVector> {
    let up = spec.rho / (1.0 + spec.rho);
    let down = 1.0 / (1.0 + spec.rho);
    let rates = spec
        .weights
        .iter()
        .enumerate()
        .map(|(class, w)| {
            if spec.saturated.contains(class) {
                w * up
            } else {
                w * down
            }
        })
        .collect();
    RateVector::from_normalized(rates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    /// Every independent set other than the saturated one has limiting load
    /// below one.
    pub holds: bool,
    /// First violating set and its limiting load.
    pub witness: Option<(ClassSet, f64)>,
    /// Smallest grid value from which every larger grid value is stable.
    pub stable_from: Option<f64>,
    /// Grid values at which the scaled rates are unstable.
    pub unstable_points: Vec<f64>,
}

/// Checks the limiting-load condition exactly at `ρ = 1` and stability of the
/// scaled rates on `rho_grid`.
pub fn check_assumption(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    spec: &ScalingSpec,
    rho_grid: &[f64],
) -> Result<AssumptionCheck> {
    let limit = spec.limiting_rates();
    let witness = index
        .nonempty_positions()
        .filter(|&p| index.set(p) != spec.saturated)
        .map(|p| {
            (
                index.set(p),
                index.set(p).sum(&limit),
                index.neighbors(p).sum(&limit),
            )
        })
        .find(|(_, inflow, outflow)| inflow >= outflow)
        .map(|(set, inflow, outflow)| (set, inflow / outflow));

    let mut grid = rho_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let stable: Vec<bool> = grid
        .par_iter()
        .map(|&rho| -> Result<bool> {
            let alpha = scaled_rates(&spec.with_rho(rho)?)?;
            Ok(analytics::check_stability_with(graph, index, &alpha).stable)
        })
        .collect::<Result<_>>()?;
    let unstable_points: Vec<f64> = grid
        .iter()
        .zip(&stable)
        .filter(|(_, s)| !**s)
        .map(|(r, _)| *r)
        .collect();
    let first_tail = stable.iter().rposition(|s| !s).map_or(0, |k| k + 1);
    Ok(AssumptionCheck {
        holds: witness.is_none(),
        witness,
        stable_from: grid.get(first_tail).copied(),
        unstable_points,
    })
}

/// Scaled quantities whose limits are known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMetrics {
    /// `π(I)` for the saturated set.
    pub pi_saturated: f64,
    pub omega: Vec<f64>,
    /// `(1−ρ)L_i/ρ`.
    pub scaled_li: Vec<f64>,
    /// `(1−ρ)L/ρ`.
    pub scaled_l: f64,
    /// `(1−ρ)E[T_i]`; `None` for classes without arrivals.
    pub scaled_eti: Vec<Option<f64>>,
}

/// Limits as `ρ ↑ 1`. Rejects specs that violate the limiting-load condition.
pub fn asymptotic_metrics(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    spec: &ScalingSpec,
) -> Result<ScaledMetrics> {
    let check = check_assumption(graph, index, spec, &[])?;
    if let Some((set, load)) = check.witness {
        return Err(Error::Domain(format!(
            "set {set} has limiting load {load} >= 1; the heavy-traffic limit does not apply"
        )));
    }
    Ok(predictions(spec))
}

fn predictions(spec: &ScalingSpec) -> ScaledMetrics {
    let n = spec.n_classes();
    let on = |class: usize| spec.saturated.contains(class);
    ScaledMetrics {
        pi_saturated: 1.0,
        omega: (0..n).map(|c| if on(c) { 1.0 } else { 0.0 }).collect(),
        scaled_li: (0..n).map(|c| spec.p(c)).collect(),
        scaled_l: 1.0,
        scaled_eti: (0..n)
            .map(|c| {
                if spec.weights[c] == 0.0 {
                    None
                } else if on(c) {
                    Some(2.0)
                } else {
                    Some(0.0)
                }
            })
            .collect(),
    }
}

fn scale_metrics(
    spec: &ScalingSpec,
    index: &IndependentSetIndex,
    m: &MetricsTable,
) -> ScaledMetrics {
    let rho = spec.rho;
    let pi_saturated = index
        .position(spec.saturated)
        .map_or(0.0, |p| m.pi.values[p]);
    ScaledMetrics {
        pi_saturated,
        omega: m.omega.clone(),
        scaled_li: m.li.iter().map(|l| (1.0 - rho) * l / rho).collect(),
        scaled_l: (1.0 - rho) * m.l / rho,
        scaled_eti: m.eti.iter().map(|t| t.map(|t| (1.0 - rho) * t)).collect(),
    }
}

/// Exact scaled metrics at one `ρ` next to their limits.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub rho: f64,
    pub predicted: ScaledMetrics,
    pub measured: ScaledMetrics,
    pub metrics: MetricsTable,
}

impl AsymptoticReport {
    /// Relative gaps of the saturated-class quantities, absolute gaps for
    /// quantities whose limit is zero.
    pub fn gaps(&self) -> ScaledGaps {
        let (p, m) = (&self.predicted, &self.measured);
        ScaledGaps {
            pi_saturated: gap(m.pi_saturated, p.pi_saturated),
            omega: m
                .omega
                .iter()
                .zip(&p.omega)
                .map(|(a, b)| gap(*a, *b))
                .collect(),
            scaled_li: m
                .scaled_li
                .iter()
                .zip(&p.scaled_li)
                .map(|(a, b)| gap(*a, *b))
                .collect(),
            scaled_l: gap(m.scaled_l, p.scaled_l),
            scaled_eti: m
                .scaled_eti
                .iter()
                .zip(&p.scaled_eti)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(gap(*a, *b)),
                    _ => None,
                })
                .collect(),
        }
    }

    /// Largest relative gap over the saturated classes.
    pub fn saturated_gap(&self, spec: &ScalingSpec) -> f64 {
        let g = self.gaps();
        let mut worst = g.pi_saturated.max(g.scaled_l);
        for c in spec.saturated {
            if spec.p(c) > 0.0 {
                worst = worst.max(g.omega[c]).max(g.scaled_li[c]);
                worst = worst.max(g.scaled_eti[c].unwrap_or(0.0));
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGaps {
    pub pi_saturated: f64,
    pub omega: Vec<f64>,
    pub scaled_li: Vec<f64>,
    pub scaled_l: f64,
    pub scaled_eti: Vec<Option<f64>>,
}

fn gap(measured: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        measured.abs()
    } else {
        ((measured - predicted) / predicted).abs()
    }
}

/// Exact metrics of the scaled rates at `spec.rho()`.
pub fn measure(index: &IndependentSetIndex, spec: &ScalingSpec) -> Result<AsymptoticReport> {
    let alpha = scaled_rates(spec)?;
    let metrics = MetricsTable::compute(index, &alpha)?;
    Ok(AsymptoticReport {
        rho: spec.rho,
        predicted: predictions(spec),
        measured: scale_metrics(spec, index, &metrics),
        metrics,
    })
}

/// One grid point of a convergence sweep. Instability is recorded rather
/// than raised.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub rho: f64,
    pub report: Result<AsymptoticReport>,
}

/// Exact metrics and predictions along `rho_grid`, in grid order.
pub fn convergence_sweep(
    index: &IndependentSetIndex,
    spec: &ScalingSpec,
    rho_grid: &[f64],
) -> Vec<ConvergencePoint> {
    rho_grid
        .par_iter()
        .map(|&rho| ConvergencePoint {
            rho,
            report: spec.with_rho(rho).and_then(|s| measure(index, &s)),
        })
        .collect()
}

/// Marginal generating function of a saturated class at
/// `z_i = exp(−u(1−ρ))`, with its limit `1/(1 + p_i u)`.
pub fn pgf_limit_check(
    index: &IndependentSetIndex,
    spec: &ScalingSpec,
    class: usize,
    u: f64,
) -> Result<(f64, f64)> {
    require_saturated(spec, class)?;
    let alpha = scaled_rates(spec)?;
    let mut z = vec![1.0; spec.n_classes()];
    z[class] = (-u * (1.0 - spec.rho)).exp();
    let measured = analytics::evaluate_pgf(index, &alpha, &z)?;
    Ok((measured, 1.0 / (1.0 + spec.p(class) * u)))
}

/// Transform of the scaled matching time `(1−ρ)T_i` at `u`, with its limit
/// `(1/2)/(1/2 + u)`.
pub fn lst_limit_check(
    index: &IndependentSetIndex,
    spec: &ScalingSpec,
    class: usize,
    u: f64,
) -> Result<(f64, f64)> {
    require_saturated(spec, class)?;
    let alpha = scaled_rates(spec)?;
    let measured = analytics::lst_matching_time(index, &alpha, class, (1.0 - spec.rho) * u)?;
    Ok((measured, 0.5 / (0.5 + u)))
}

fn require_saturated(spec: &ScalingSpec, class: usize) -> Result<()> {
    if !spec.saturated.contains(class) {
        return Err(Error::Domain(format!(
            "class {} is not in the saturated set {}",
            class + 1,
            spec.saturated
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> CompatibilityGraph {
        CompatibilityGraph::complete(3).unwrap()
    }

    #[test]
    fn triangle_rates_at_half() {
        let g = triangle();
        let spec = ScalingSpec::uniform(&g, ClassSet::singleton(0), 0.5).unwrap();
        let a = scaled_rates(&spec).unwrap();
        assert!(a.max_abs_diff(&[1.0 / 3.0; 3]) < 1e-15);
    }

    #[test]
    fn c9_rates_at_half() {
        let g = CompatibilityGraph::cycle(9).unwrap();
        let i = ClassSet::from([0, 2, 4, 6]);
        let a = scaled_rates(&ScalingSpec::uniform(&g, i, 0.5).unwrap()).unwrap();
        assert!((a.of(i) - 1.0 / 3.0).abs() < 1e-15);
        for c in i {
            assert!((a[c] - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_maximal_and_bad_rho() {
        let g = CompatibilityGraph::cycle(9).unwrap();
        assert!(ScalingSpec::uniform(&g, ClassSet::from([0, 2]), 0.5).is_err());
        assert!(ScalingSpec::uniform(&g, ClassSet::from([0, 1]), 0.5).is_err());
        let tri = triangle();
        assert!(ScalingSpec::uniform(&tri, ClassSet::singleton(0), 1.0).is_err());
        assert!(ScalingSpec::uniform(&tri, ClassSet::singleton(0), 0.0).is_err());
    }

    #[test]
    fn assumption_checks() {
        let g = triangle();
        let idx = g.independent_sets().unwrap();
        let spec = ScalingSpec::new(&g, ClassSet::singleton(0), &[1.0], &[0.9, 0.1], 0.5).unwrap();
        let check = check_assumption(&g, &idx, &spec, &[0.9, 0.99]).unwrap();
        assert!(check.holds);
        assert_eq!(check.stable_from, Some(0.9));

        // In C9 with I = {1,3,5,7}, putting all of q on class 9 saturates {9}
        // against E({9}) = {1,8}, whose limiting rate is p_1/2.
        let c9 = CompatibilityGraph::cycle(9).unwrap();
        let idx = c9.independent_sets().unwrap();
        let i = ClassSet::from([0, 2, 4, 6]);
        let spec = ScalingSpec::new(&c9, i, &[0.25; 4], &[0.0, 0.0, 0.0, 0.0, 1.0], 0.5).unwrap();
        let check = check_assumption(&c9, &idx, &spec, &[0.5]).unwrap();
        assert!(!check.holds);
        assert!(check.witness.is_some());
        assert!(asymptotic_metrics(&c9, &idx, &spec).is_err());
    }

    #[test]
    fn triangle_limits_at_high_load() {
        let g = triangle();
        let idx = g.independent_sets().unwrap();
        let spec = ScalingSpec::uniform(&g, ClassSet::singleton(0), 0.999).unwrap();
        let report = measure(&idx, &spec).unwrap();
        assert!((report.measured.scaled_li[0] - 1.0).abs() < 0.05);
        assert!(report.measured.omega[0] >= 0.99);
        assert!(report.measured.omega[1] <= 0.01);
        assert!(report.metrics.li[1] <= 0.05);
        for u in [0.5, 1.0, 2.0] {
            let (m, p) = pgf_limit_check(&idx, &spec, 0, u).unwrap();
            assert!((m - p).abs() / p < 0.05);
            let (m, p) = lst_limit_check(&idx, &spec, 0, u).unwrap();
            assert!((m - p).abs() / p < 0.05);
        }
    }

    #[test]
    fn sweep_gaps_shrink() {
        let g = triangle();
        let idx = g.independent_sets().unwrap();
        let spec = ScalingSpec::uniform(&g, ClassSet::singleton(0), 0.5).unwrap();
        let grid = [0.9, 0.95, 0.99, 0.995, 0.999];
        let points = convergence_sweep(&idx, &spec, &grid);
        let gaps: Vec<f64> = points
            .iter()
            .map(|p| p.report.as_ref().unwrap().saturated_gap(&spec))
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "{gaps:?}");
        }
    }
}
