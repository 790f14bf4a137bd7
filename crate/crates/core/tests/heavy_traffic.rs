mod common;

use common::*;
use matchq::analytics;
use matchq::heavy_traffic::{self, ScalingSpec};

#[test]
fn scaled_rates_follow_the_scaling() {
    let g = cycle9();
    let set = set1(&[1, 3, 5, 7]);
    let rho = 0.9;
    let spec = ScalingSpec::uniform(&g, set, rho).unwrap();
    let a = heavy_traffic::scaled_rates(&spec).unwrap();
    for i in 0..9 {
        let want = if set.contains(i) {
            0.25 * rho / (1.0 + rho)
        } else {
            0.2 / (1.0 + rho)
        };
        assert!((a[i] - want).abs() < 1e-15, "class {i}");
    }
    let limit = spec.limiting_rates();
    assert!((limit.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    // The saturated set carries exactly half the traffic in the limit.
    assert!((set.sum(&limit) - 0.5).abs() < 1e-15);
}

#[test]
fn non_maximal_sets_are_rejected() {
    let g = cycle9();
    assert!(ScalingSpec::uniform(&g, set1(&[1, 3, 5]), 0.9).is_err());
    assert!(ScalingSpec::uniform(&g, set1(&[1, 2]), 0.9).is_err());
    assert!(ScalingSpec::uniform(&g, set1(&[1, 3, 5, 7]), 1.0).is_err());
    assert!(ScalingSpec::uniform(&g, set1(&[1, 3, 5, 7]), 0.0).is_err());
}

#[test]
fn saturated_set_dominates_the_load() {
    let g = cycle9();
    let idx = g.independent_sets().unwrap();
    let spec = ScalingSpec::uniform(&g, set1(&[1, 3, 5, 7]), 0.99).unwrap();
    let a = heavy_traffic::scaled_rates(&spec).unwrap();
    let report = analytics::check_stability_with(&g, &idx, &a);
    assert!(report.stable);
    assert_eq!(report.argmax_set, set1(&[1, 3, 5, 7]));
    assert!((report.max_load - 0.99).abs() < 1e-12);
    let check = heavy_traffic::check_assumption(&g, &idx, &spec, &[0.5, 0.9, 0.99]).unwrap();
    assert!(check.holds);
    // {2,4,6,8} has load 0.8/(ρ + 0.2), above one until ρ = 0.6.
    assert_eq!(check.stable_from, Some(0.9));
    assert_eq!(check.unstable_points, vec![0.5]);
}

#[test]
fn gaps_shrink_toward_the_limit() {
    for (g, saturated) in [(triangle(), vec![1]), (cycle9(), vec![1, 3, 5, 7])] {
        let idx = g.independent_sets().unwrap();
        let spec = ScalingSpec::uniform(&g, set1(&saturated), 0.9).unwrap();
        let points = heavy_traffic::convergence_sweep(&idx, &spec, &[0.9, 0.99, 0.999]);
        let gaps: Vec<(f64, f64)> = points
            .iter()
            .map(|p| {
                let r = p.report.as_ref().unwrap();
                (r.gaps().scaled_l.abs(), r.saturated_gap(&spec).abs())
            })
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1].0 < w[0].0, "{gaps:?}");
            assert!(w[1].1 < w[0].1, "{gaps:?}");
        }
        // First order in 1 − ρ: a tenfold step shrinks the gap about tenfold.
        let ratio = gaps[1].0 / gaps[2].0;
        assert!((5.0..20.0).contains(&ratio), "{gaps:?}");
    }
}

#[test]
fn transform_limits() {
    let g = triangle();
    let idx = g.independent_sets().unwrap();
    let spec = ScalingSpec::uniform(&g, set1(&[1]), 0.999).unwrap();
    for u in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let (got, want) = heavy_traffic::pgf_limit_check(&idx, &spec, 0, u).unwrap();
        assert!(
            (got - want).abs() / want < 0.01,
            "pgf u = {u}: {got} vs {want}"
        );
        let (got, want) = heavy_traffic::lst_limit_check(&idx, &spec, 0, u).unwrap();
        assert!(
            (got - want).abs() / want < 0.01,
            "lst u = {u}: {got} vs {want}"
        );
    }
    assert!(heavy_traffic::pgf_limit_check(&idx, &spec, 1, 1.0).is_err());
}

#[test]
fn asymptotic_predictions() {
    let g = cycle9();
    let set = set1(&[1, 3, 5, 7]);
    let spec = ScalingSpec::uniform(&g, set, 0.5).unwrap();
    let idx = g.independent_sets().unwrap();
    let limit = heavy_traffic::asymptotic_metrics(&g, &idx, &spec).unwrap();
    assert_eq!(limit.pi_saturated, 1.0);
    assert_eq!(limit.scaled_l, 1.0);
    for i in 0..9 {
        let on = set.contains(i);
        assert_eq!(limit.omega[i], if on { 1.0 } else { 0.0 });
        assert_eq!(limit.scaled_li[i], if on { 0.25 } else { 0.0 });
        assert_eq!(limit.scaled_eti[i], Some(if on { 2.0 } else { 0.0 }));
    }
}
