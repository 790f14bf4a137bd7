#![allow(dead_code)]

use std::collections::HashMap;

use matchq::{ClassSet, CompatibilityGraph, RateVector};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn paw() -> CompatibilityGraph {
    CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)]).unwrap()
}

pub fn triangle() -> CompatibilityGraph {
    CompatibilityGraph::complete(3).unwrap()
}

pub fn cycle9() -> CompatibilityGraph {
    CompatibilityGraph::cycle(9).unwrap()
}

pub fn chord9() -> CompatibilityGraph {
    cycle9().with_extra_edges(&[(4, 8)]).unwrap()
}

pub fn racket9() -> CompatibilityGraph {
    CompatibilityGraph::racket(4, 5).unwrap()
}

pub fn rates(v: &[f64]) -> RateVector {
    RateVector::new(v.to_vec()).unwrap()
}

pub fn paw_degree() -> RateVector {
    rates(&[0.25, 0.25, 0.375, 0.125])
}

pub fn paw_minmax() -> RateVector {
    rates(&[1.0, 1.0, 1.0, 0.0])
}

/// Converts 1-based class lists to a set.
pub fn set1(classes: &[usize]) -> ClassSet {
    classes.iter().map(|c| c - 1).collect()
}

/// Independent sets by testing every subset.
pub fn brute_force_independent_sets(g: &CompatibilityGraph) -> Vec<ClassSet> {
    let n = g.n_classes();
    (1u64..(1u64 << n))
        .filter(|&bits| {
            let members: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
            members
                .iter()
                .all(|&i| members.iter().all(|&j| !g.are_compatible(i, j)))
        })
        .map(ClassSet::from_bits)
        .collect()
}

/// Lucas numbers: independent sets of the n-cycle, including the empty set.
pub fn lucas(n: usize) -> u64 {
    let (mut a, mut b) = (2u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// Random connected graph on `n ≥ 3` classes containing an odd cycle.
pub fn random_nonbipartite_graph<R: Rng>(rng: &mut R, n: usize) -> CompatibilityGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        edges.push((order[k], parent));
    }
    let density: f64 = rng.random_range(0.0..0.6);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    let g = CompatibilityGraph::new(n, &edges).unwrap();
    if !g.classify().bipartite {
        return g;
    }
    // Join two classes of the same color to close an odd cycle.
    let color = two_coloring(&g);
    let (i, j) = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| color[i] == color[j] && !g.are_compatible(i, j))
        .expect("some same-color pair");
    g.with_extra_edges(&[(i, j)]).unwrap()
}

fn two_coloring(g: &CompatibilityGraph) -> Vec<u8> {
    let n = g.n_classes();
    let mut color = vec![2u8; n];
    color[0] = 0;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for w in g.neighbors(v) {
            if color[w] == 2 {
                color[w] = 1 - color[v];
                stack.push(w);
            }
        }
    }
    color
}

/// Random symmetric positive weights on the edges of `g`.
pub fn random_weights<R: Rng>(rng: &mut R, g: &CompatibilityGraph) -> Vec<Vec<f64>> {
    let n = g.n_classes();
    let mut w = vec![vec![0.0; n]; n];
    for (i, j) in g.edges() {
        let x = rng.random_range(0.05..5.0);
        w[i][j] = x;
        w[j][i] = x;
    }
    w
}

/// Stable rates: a random vector when it happens to be stable, otherwise
/// weight-proportional rates with random weights.
pub fn random_stable_rates<R: Rng>(rng: &mut R, g: &CompatibilityGraph) -> RateVector {
    let n = g.n_classes();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let candidate = RateVector::new(raw).unwrap();
    if max_load_brute(g, candidate.as_slice()) < 0.98 {
        return candidate;
    }
    let w = random_weights(rng, g);
    RateVector::new(w.iter().map(|row| row.iter().sum()).collect()).unwrap()
}

/// Maximum load over independent sets with positive rate, from scratch.
pub fn max_load_brute(g: &CompatibilityGraph, a: &[f64]) -> f64 {
    brute_force_independent_sets(g)
        .into_iter()
        .filter(|s| s.sum(a) > 0.0)
        .map(|s| s.sum(a) / g.neighbors_of_set(s).sum(a))
        .fold(0.0, f64::max)
}

/// FCFM transition written without the library's buffer type.
pub fn fcfm(g: &CompatibilityGraph, word: &[usize], class: usize) -> Vec<usize> {
    let mut next = word.to_vec();
    match word.iter().position(|&c| g.are_compatible(c, class)) {
        Some(q) => {
            next.remove(q);
        }
        None => next.push(class),
    }
    next
}

/// Stationary law of the matching process restricted to words of length at
/// most `k` (arrivals that would exceed `k` are dropped), by Gauss–Seidel on
/// the global balance equations. Makes no use of the product form.
pub struct TruncatedChain {
    pub states: Vec<Vec<usize>>,
    pub pi: Vec<f64>,
    pub sweeps: usize,
}

pub fn solve_truncated_chain(g: &CompatibilityGraph, a: &[f64], k: usize) -> TruncatedChain {
    let n = g.n_classes();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut states: Vec<Vec<usize>> = vec![Vec::new()];
    index.insert(Vec::new(), 0);
    let mut head = 0;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    while head < states.len() {
        let s = states[head].clone();
        for c in (0..n).filter(|&c| a[c] > 0.0) {
            let t = fcfm(g, &s, c);
            if t.len() > k {
                continue;
            }
            let id = *index.entry(t.clone()).or_insert_with(|| {
                states.push(t);
                states.len() - 1
            });
            edges.push((head, id, a[c]));
        }
        head += 1;
    }
    let m = states.len();
    let mut out = vec![0.0; m];
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for &(from, to, rate) in &edges {
        out[from] += rate;
        incoming[to].push((from, rate));
    }
    let mut pi = vec![1.0 / m as f64; m];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut change: f64 = 0.0;
        for s in 0..m {
            let inflow: f64 = incoming[s].iter().map(|&(f, r)| pi[f] * r).sum();
            let v = inflow / out[s];
            change = change.max((v - pi[s]).abs() / v.max(1e-300));
            pi[s] = v;
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if change < 1e-13 || sweeps >= 20_000 {
            break;
        }
    }
    TruncatedChain { states, pi, sweeps }
}

/// Metrics summed directly from the per-word product form, grouped by class
/// set, over words of length at most `max_len`. Independent of the
/// independent-set recursions.
pub struct WordSums {
    pub psi: HashMap<ClassSet, f64>,
    pub pi_empty: f64,
    pub l: f64,
    pub li: Vec<f64>,
    pub omega: Vec<f64>,
    pub pgf_numerator: f64,
}

pub fn word_sums(g: &CompatibilityGraph, a: &[f64], z: &[f64], max_len: usize) -> WordSums {
    let n = g.n_classes();
    #[derive(Clone)]
    struct Acc {
        mass: f64,
        len: f64,
        counts: Vec<f64>,
        zmass: f64,
    }
    let zero = Acc {
        mass: 0.0,
        len: 0.0,
        counts: vec![0.0; n],
        zmass: 0.0,
    };
    let mut total: HashMap<ClassSet, Acc> = HashMap::new();
    let mut layer: HashMap<ClassSet, Acc> = HashMap::new();
    layer.insert(
        ClassSet::EMPTY,
        Acc {
            mass: 1.0,
            zmass: 1.0,
            ..zero.clone()
        },
    );
    for _ in 0..=max_len {
        let mut next: HashMap<ClassSet, Acc> = HashMap::new();
        for (s, acc) in &layer {
            let t = total.entry(*s).or_insert_with(|| zero.clone());
            t.mass += acc.mass;
            t.len += acc.len;
            t.zmass += acc.zmass;
            for i in 0..n {
                t.counts[i] += acc.counts[i];
            }
            let blocked = g.neighbors_of_set(*s);
            for c in (0..n).filter(|&c| !blocked.contains(c) && a[c] > 0.0) {
                let s2 = s.with(c);
                let f = a[c] / g.neighbors_of_set(s2).sum(a);
                let e = next.entry(s2).or_insert_with(|| zero.clone());
                e.mass += acc.mass * f;
                e.len += (acc.len + acc.mass) * f;
                e.zmass += acc.zmass * f * z[c];
                for i in 0..n {
                    e.counts[i] += (acc.counts[i] + if i == c { acc.mass } else { 0.0 }) * f;
                }
            }
        }
        layer = next;
    }
    let norm: f64 = total.values().map(|t| t.mass).sum();
    let omega = (0..n)
        .map(|i| {
            total
                .iter()
                .filter(|(s, _)| !g.neighbors_of_set(**s).contains(i))
                .map(|(_, t)| t.mass)
                .sum::<f64>()
                / norm
        })
        .collect();
    WordSums {
        psi: total.iter().map(|(s, t)| (*s, t.mass)).collect(),
        pi_empty: 1.0 / norm,
        l: total.values().map(|t| t.len).sum::<f64>() / norm,
        li: (0..n)
            .map(|i| total.values().map(|t| t.counts[i]).sum::<f64>() / norm)
            .collect(),
        omega,
        pgf_numerator: total.values().map(|t| t.zmass).sum::<f64>() / norm,
    }
}

/// Triangle closed forms: only single-class words are feasible, so class-`i`
/// words form a geometric series with ratio `α_i/(1−α_i)`.
pub struct TriangleClosedForm {
    pub pi_empty: f64,
    pub omega: Vec<f64>,
    pub li: Vec<f64>,
}

pub fn triangle_closed_form(a: &[f64]) -> TriangleClosedForm {
    let r: Vec<f64> = a.iter().map(|x| x / (1.0 - x)).collect();
    let mass: Vec<f64> = r.iter().map(|r| r / (1.0 - r)).collect();
    let pi_empty = 1.0 / (1.0 + mass.iter().sum::<f64>());
    let omega = (0..3).map(|i| pi_empty * (1.0 + mass[i])).collect();
    let li = r.iter().map(|r| pi_empty * r / (1.0 - r).powi(2)).collect();
    TriangleClosedForm {
        pi_empty,
        omega,
        li,
    }
}
