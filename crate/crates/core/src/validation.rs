//! Brute-force oracles over buffer words.
//!
//! These work directly with feasible words instead of aggregated independent
//! sets, so they certify the recursions in [`crate::analytics`] on small
//! instances: enumeration of the truncated state space, the per-word product
//! form, both partial-balance identities, and truncated direct sums of the
//! aggregated measure.

use statrs::distribution::{DiscreteCDF, NegativeBinomial};

use crate::error::{Error, Result};
use crate::graph::{ClassSet, CompatibilityGraph, DEFAULT_SET_CAP};
use crate::rates::RateVector;

pub const DEFAULT_MAX_LENGTH: usize = 10;
pub const DEFAULT_STATE_CAP: usize = DEFAULT_SET_CAP;

/// Buffer contents, oldest item first, 0-based classes.
pub type Word = Vec<usize>;

/// All feasible words of length at most `max_length`, by length then in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedStateSpace {
    pub max_length: usize,
    pub states: Vec<Word>,
}

impl TruncatedStateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, word: &[usize]) -> bool {
        self.states.iter().any(|w| w == word)
    }
}

/// Classes present in `word`.
pub fn class_set(word: &[usize]) -> ClassSet {
    word.iter().copied().collect()
}

/// True when the classes of `word` are pairwise incompatible.
pub fn is_feasible(graph: &CompatibilityGraph, word: &[usize]) -> bool {
    word.iter().all(|&c| c < graph.n_classes())
        && (word.is_empty() || graph.is_independent(class_set(word)))
}

/// Extends every feasible word by each class not adjacent to its classes.
pub fn enumerate_states(
    graph: &CompatibilityGraph,
    max_length: usize,
    state_cap: usize,
) -> Result<TruncatedStateSpace> {
    let n = graph.n_classes();
    let mut states: Vec<Word> = vec![Vec::new()];
    let mut start = 0;
    for _ in 0..max_length {
        let end = states.len();
        for k in start..end {
            let blocked = graph.neighbors_of_set(class_set(&states[k]));
            for class in 0..n {
                if blocked.contains(class) {
                    continue;
                }
                if states.len() >= state_cap {
                    return Err(Error::ResourceCap { limit: state_cap });
                }
                let mut w = states[k].clone();
                w.push(class);
                states.push(w);
            }
        }
        start = end;
    }
    Ok(TruncatedStateSpace { max_length, states })
}

/// Unnormalized stationary measure of a word, `Π_p α_{c_p}/α(E(V(c_1..c_p)))`
/// with the empty word at 1.
pub fn product_form_measure(
    graph: &CompatibilityGraph,
    alpha: &RateVector,
    word: &[usize],
) -> Result<f64> {
    if !is_feasible(graph, word) {
        return Err(Error::Domain(format!(
            "word {} is not feasible",
            display_word(word)
        )));
    }
    let a = alpha.as_slice();
    let mut present = ClassSet::EMPTY;
    let mut value = 1.0;
    for &c in word {
        present = present.with(c);
        let outflow = graph.neighbors_of_set(present).sum(a);
        if outflow <= 0.0 {
            return Err(Error::DegenerateDenominator(present));
        }
        value *= a[c] / outflow;
    }
    Ok(value)
}

/// Absolute residuals of both partial-balance identities at one word.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialBalance {
    /// Departures from `c` against arrivals into `c`; `None` for the empty
    /// word.
    pub last_arrival: Option<f64>,
    /// Arrivals of class `i` out of `c` against departures of an `i` item
    /// into `c`, for every class `i` that can join `c`.
    pub per_class: Vec<(usize, f64)>,
}

impl PartialBalance {
    pub fn max_residual(&self) -> f64 {
        self.per_class
            .iter()
            .map(|(_, r)| *r)
            .chain(self.last_arrival)
            .fold(0.0, f64::max)
    }
}

/// Evaluates
/// `π(c) α(E(V(c))) = π(c_1..c_{n−1}) α_{c_n}` and, for each class `i` not
/// adjacent to `c`,
/// `π(c) α_i = Σ_{p=1}^{n+1} π(c_1..c_{p−1}, i, c_p..c_n) α(E_i ∖ E(V(c_1..c_{p−1})))`.
pub fn check_partial_balance(
    graph: &CompatibilityGraph,
    alpha: &RateVector,
    word: &[usize],
) -> Result<PartialBalance> {
    let a = alpha.as_slice();
    let pi_c = product_form_measure(graph, alpha, word)?;
    let present = class_set(word);

    let last_arrival = match word.split_last() {
        None => None,
        Some((&last, prefix)) => {
            let lhs = pi_c * graph.neighbors_of_set(present).sum(a);
            let rhs = product_form_measure(graph, alpha, prefix)? * a[last];
            Some((lhs - rhs).abs())
        }
    };

    let blocked = graph.neighbors_of_set(present);
    let mut per_class = Vec::new();
    for i in (0..graph.n_classes()).filter(|&i| !blocked.contains(i)) {
        let lhs = pi_c * a[i];
        let mut rhs = 0.0;
        let mut before = ClassSet::EMPTY;
        for p in 0..=word.len() {
            let mut inserted = Vec::with_capacity(word.len() + 1);
            inserted.extend_from_slice(&word[..p]);
            inserted.push(i);
            inserted.extend_from_slice(&word[p..]);
            let rate = graph
                .neighbors(i)
                .difference(graph.neighbors_of_set(before))
                .sum(a);
            if rate > 0.0 {
                rhs += product_form_measure(graph, alpha, &inserted)? * rate;
            }
            if p < word.len() {
                before = before.with(word[p]);
            }
        }
        per_class.push((i, (lhs - rhs).abs()));
    }
    Ok(PartialBalance {
        last_arrival,
        per_class,
    })
}

/// `Σ π(c)` over feasible words with class set exactly `set` and length at
/// most `max_length`, by depth-first search over words on the alphabet `set`.
pub fn truncated_aggregate(
    graph: &CompatibilityGraph,
    alpha: &RateVector,
    set: ClassSet,
    max_length: usize,
    state_cap: usize,
) -> Result<f64> {
    if set.is_empty() {
        return Ok(1.0);
    }
    if !graph.is_independent(set) {
        return Err(Error::Domain(format!("{set} is not an independent set")));
    }
    let a = alpha.as_slice();
    if set.iter().any(|c| a[c] == 0.0) {
        return Ok(0.0);
    }
    let letters: Vec<usize> = set.iter().collect();
    let mut visited = 0usize;
    let mut total = 0.0;
    // (classes used so far, length, measure)
    let mut stack = vec![(ClassSet::EMPTY, 0usize, 1.0f64)];
    while let Some((used, len, value)) = stack.pop() {
        visited += 1;
        if visited > state_cap {
            return Err(Error::ResourceCap { limit: state_cap });
        }
        if used == set {
            total += value;
        }
        if len == max_length || set.len() - used.len() > max_length - len {
            continue;
        }
        for &c in &letters {
            let next = used.with(c);
            let outflow = graph.neighbors_of_set(next).sum(a);
            stack.push((next, len + 1, value * a[c] / outflow));
        }
    }
    Ok(total)
}

/// Upper bound on `ψ(I) − truncated_aggregate(I, K)`.
///
/// A word with class set `I` is a sequence of first appearances interleaved
/// with repeats; while the present set is `S`, each repeat contributes a
/// factor whose sum is the load `ρ(S) ≤ r`. The number of repeats is thus
/// dominated by a negative binomial count of failures with `|I|` successes
/// and failure probability `r`, and the missing mass is at most
/// `ψ(I) · P(NB ≥ K − |I| + 1)`.
pub fn tail_bound(
    graph: &CompatibilityGraph,
    alpha: &RateVector,
    set: ClassSet,
    psi: f64,
    max_length: usize,
) -> Result<f64> {
    let k = set.len();
    if k == 0 {
        return Ok(0.0);
    }
    if max_length < k {
        return Ok(psi);
    }
    let r = max_subset_load(graph, alpha, set);
    if r >= 1.0 {
        return Err(Error::Domain(format!(
            "a subset of {set} has load {r} >= 1"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let nb = NegativeBinomial::new(k as f64, 1.0 - r).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(psi * nb.sf((max_length - k) as u64))
}

/// Largest load among the nonempty subsets of `set` with positive rate.
pub fn max_subset_load(graph: &CompatibilityGraph, alpha: &RateVector, set: ClassSet) -> f64 {
    let a = alpha.as_slice();
    let bits = set.bits();
    let mut sub = bits;
    let mut worst: f64 = 0.0;
    while sub != 0 {
        let s = ClassSet::from_bits(sub);
        let inflow = s.sum(a);
        if inflow > 0.0 {
            worst = worst.max(inflow / graph.neighbors_of_set(s).sum(a));
        }
        sub = (sub - 1) & bits;
    }
    worst
}

fn display_word(word: &[usize]) -> String {
    let parts: Vec<String> = word.iter().map(|c| (c + 1).to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::compute_psi;

    fn paw() -> CompatibilityGraph {
        CompatibilityGraph::from_one_based(4, &[(1, 2), (1, 3), (2, 3), (3, 4)]).unwrap()
    }

    fn one_based(words: &[Word]) -> Vec<Word> {
        words
            .iter()
            .map(|w| w.iter().map(|c| c + 1).collect())
            .collect()
    }

    #[test]
    fn paw_short_words() {
        let g = paw();
        let k1 = enumerate_states(&g, 1, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(
            one_based(&k1.states),
            vec![vec![], vec![1], vec![2], vec![3], vec![4]]
        );
        let k2 = enumerate_states(&g, 2, DEFAULT_STATE_CAP).unwrap();
        let mut pairs: Vec<Word> = one_based(&k2.states[5..]);
        pairs.sort();
        assert_eq!(
            pairs,
            vec![
                vec![1, 1],
                vec![1, 4],
                vec![2, 2],
                vec![2, 4],
                vec![3, 3],
                vec![4, 1],
                vec![4, 2],
                vec![4, 4]
            ]
        );
    }

    #[test]
    fn triangle_words_repeat_one_class() {
        let g = CompatibilityGraph::complete(3).unwrap();
        let space = enumerate_states(&g, 3, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(space.len(), 10);
        assert!(space.states.iter().all(|w| class_set(w).len() <= 1));
        assert!(enumerate_states(&g, 3, 5).is_err());
    }

    #[test]
    fn product_form_examples() {
        let g = CompatibilityGraph::complete(3).unwrap();
        let a = RateVector::uniform(3);
        assert_eq!(product_form_measure(&g, &a, &[]).unwrap(), 1.0);
        assert!((product_form_measure(&g, &a, &[0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((product_form_measure(&g, &a, &[0, 0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(product_form_measure(&g, &a, &[0, 1]).is_err());
    }

    #[test]
    fn triangle_partial_balance_by_hand() {
        let g = CompatibilityGraph::complete(3).unwrap();
        let a = RateVector::uniform(3);
        let pb = check_partial_balance(&g, &a, &[0]).unwrap();
        // Only class 1 can join (1). Inserting it at either position gives
        // (1,1) with measure 1/4; the first position sees rate α(E_1) = 2/3,
        // the second α(E_1 ∖ E_1) = 0, so 1/2 · 1/3 = 1/4 · 2/3.
        assert_eq!(pb.per_class.len(), 1);
        assert!(pb.max_residual() < 1e-15);
        let empty = check_partial_balance(&g, &a, &[]).unwrap();
        assert!(empty.last_arrival.is_none());
        assert_eq!(empty.per_class.len(), 3);
        assert!(empty.max_residual() < 1e-15);
    }

    #[test]
    fn triangle_partial_sums() {
        let g = CompatibilityGraph::complete(3).unwrap();
        let a = RateVector::uniform(3);
        let s = ClassSet::singleton(0);
        let sums: Vec<f64> = (1..=4)
            .map(|k| truncated_aggregate(&g, &a, s, k, DEFAULT_STATE_CAP).unwrap())
            .collect();
        for (got, want) in sums.iter().zip([0.5, 0.75, 0.875, 0.9375]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rate_class_gives_zero() {
        let g = paw();
        let a = RateVector::new(vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let s = ClassSet::from([0, 3]);
        assert_eq!(
            truncated_aggregate(&g, &a, s, 8, DEFAULT_STATE_CAP).unwrap(),
            0.0
        );
    }

    #[test]
    fn paw_truncation_within_bound() {
        let g = paw();
        let a = RateVector::new(vec![2.0, 2.0, 3.0, 1.0]).unwrap();
        let index = g.independent_sets().unwrap();
        let psi = compute_psi(&index, &a).unwrap();
        let s = ClassSet::singleton(3);
        let exact = psi.value(index.position(s).unwrap());
        let partial = truncated_aggregate(&g, &a, s, 12, DEFAULT_STATE_CAP).unwrap();
        let bound = tail_bound(&g, &a, s, exact, 12).unwrap();
        // For a single class the bound is attained exactly.
        assert!(partial <= exact);
        assert!(exact - partial <= bound * (1.0 + 1e-9) + 1e-15);
    }
}
