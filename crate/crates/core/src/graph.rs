//! Compatibility graphs, class sets and the independent-set index.
//!
//! Classes are indexed from 0 in the library API. Anything rendered for a
//! human (`Display` of [`ClassSet`], files, CSV headers) is 1-based.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Largest number of classes a [`ClassSet`] bitmask can hold.
pub const MAX_CLASSES: usize = 64;

/// Default cap on the number of enumerated independent sets.
pub const DEFAULT_SET_CAP: usize = 1_000_000;

/// A subset of item classes stored as a 64-bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassSet(u64);

impl ClassSet {
    pub const EMPTY: ClassSet = ClassSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        ClassSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(class: usize) -> Self {
        debug_assert!(class < MAX_CLASSES);
        ClassSet(1 << class)
    }

    /// All classes `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= MAX_CLASSES {
            ClassSet(u64::MAX)
        } else {
            ClassSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, class: usize) -> bool {
        class < MAX_CLASSES && self.0 >> class & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[must_use]
    pub fn with(self, class: usize) -> Self {
        ClassSet(self.0 | 1 << class)
    }

    #[must_use]
    pub fn without(self, class: usize) -> Self {
        ClassSet(self.0 & !(1 << class))
    }

    #[must_use]
    pub fn union(self, other: Self) -> Self {
        ClassSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: Self) -> Self {
        ClassSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: Self) -> Self {
        ClassSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> ClassIter {
        ClassIter(self.0)
    }

    /// Sum of `values[i]` over members `i`.
    pub fn sum(self, values: &[f64]) -> f64 {
        self.iter().map(|i| values[i]).sum()
    }
}

impl FromIterator<usize> for ClassSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(ClassSet::EMPTY, ClassSet::with)
    }
}

impl<const K: usize> From<[usize; K]> for ClassSet {
    fn from(classes: [usize; K]) -> Self {
        classes.into_iter().collect()
    }
}

impl IntoIterator for ClassSet {
    type Item = usize;
    type IntoIter = ClassIter;

    fn into_iter(self) -> ClassIter {
        self.iter()
    }
}

/// Iterator over the members of a [`ClassSet`].
#[derive(Clone, Debug)]
pub struct ClassIter(u64);

impl Iterator for ClassIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ClassIter {}

impl fmt::Display for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassSet{self}")
    }
}

/// Connectivity and bipartiteness of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphClass {
    pub connected: bool,
    pub bipartite: bool,
}

/// Undirected simple graph on `n` item classes. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct CompatibilityGraph {
    n: usize,
    adjacency: Vec<ClassSet>,
    edge_count: usize,
}

impl CompatibilityGraph {
    /// Builds a graph from 0-based edges. Duplicate edges collapse.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if !(2..=MAX_CLASSES).contains(&n) {
            return Err(Error::ClassCount {
                got: n,
                max: MAX_CLASSES,
            });
        }
        let mut adjacency = vec![ClassSet::EMPTY; n];
        for &(i, j) in edges {
            for k in [i, j] {
                if k >= n {
                    return Err(Error::ClassOutOfRange { index: k, n });
                }
            }
            if i == j {
                return Err(Error::SelfEdge(i));
            }
            adjacency[i] = adjacency[i].with(j);
            adjacency[j] = adjacency[j].with(i);
        }
        let edge_count = adjacency.iter().map(|a| a.len()).sum::<usize>() / 2;
        Ok(CompatibilityGraph {
            n,
            adjacency,
            edge_count,
        })
    }

    /// Builds a graph from 1-based edges, as written in graph files.
    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut shifted = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for k in [i, j] {
                if k == 0 || k > n {
                    return Err(Error::ClassOutOfRange { index: k, n });
                }
            }
            shifted.push((i - 1, j - 1));
        }
        Self::new(n, &shifted)
    }

    /// Complete graph on `n` classes.
    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::new(n, &edges)
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::ClassCount {
                got: n,
                max: MAX_CLASSES,
            });
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// A path of `line` classes attached to a cycle of `ring` classes: the last
    /// path class is also the first cycle class.
    pub fn racket(line: usize, ring: usize) -> Result<Self> {
        if line < 1 || ring < 3 {
            return Err(Error::Domain(format!(
                "racket needs a line of at least 1 class and a ring of at least 3, got {line} and {ring}"
            )));
        }
        let n = line + ring;
        let mut edges: Vec<_> = (0..line).map(|i| (i, i + 1)).collect();
        let first = line;
        for k in 0..ring {
            edges.push((first + k, first + (k + 1) % ring));
        }
        Self::new(n, &edges)
    }

    /// Copy of this graph with additional 0-based edges.
    pub fn with_extra_edges(&self, extra: &[(usize, usize)]) -> Result<Self> {
        let mut edges = self.edges();
        edges.extend_from_slice(extra);
        Self::new(self.n, &edges)
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edges `(i, j)` with `i < j`, 0-based.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| {
                self.adjacency[i]
                    .iter()
                    .filter(move |&j| j > i)
                    .map(move |j| (i, j))
            })
            .collect()
    }

    pub fn all_classes(&self) -> ClassSet {
        ClassSet::full(self.n)
    }

    pub fn are_compatible(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(j)
    }

    /// Neighborhood of a single class.
    pub fn neighbors(&self, class: usize) -> ClassSet {
        self.adjacency[class]
    }

    pub fn degree(&self, class: usize) -> usize {
        self.adjacency[class].len()
    }

    /// Union of the neighborhoods of the members of `set`.
    pub fn neighbors_of_set(&self, set: ClassSet) -> ClassSet {
        set.iter()
            .fold(ClassSet::EMPTY, |acc, i| acc.union(self.adjacency[i]))
    }

    /// True iff `set` is nonempty and contains no edge. The empty set is
    /// never reported as independent.
    pub fn is_independent(&self, set: ClassSet) -> bool {
        !set.is_empty()
            && set.is_subset(self.all_classes())
            && set.is_disjoint(self.neighbors_of_set(set))
    }

    /// Independent and not contained in a larger independent set.
    pub fn is_maximal_independent(&self, set: ClassSet) -> bool {
        self.is_independent(set) && set.union(self.neighbors_of_set(set)) == self.all_classes()
    }

    pub fn classify(&self) -> GraphClass {
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        let mut components = 0;
        let mut bipartite = true;
        for start in 0..self.n {
            if color[start].is_some() {
                continue;
            }
            components += 1;
            color[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].unwrap();
                for v in self.adjacency[u] {
                    match color[v] {
                        None => {
                            color[v] = Some(!cu);
                            queue.push_back(v);
                        }
                        Some(cv) if cv == cu => bipartite = false,
                        Some(_) => {}
                    }
                }
            }
        }
        GraphClass {
            connected: components == 1,
            bipartite,
        }
    }

    /// Errors unless the graph is connected and non-bipartite.
    pub fn require_stabilizable(&self) -> Result<()> {
        let class = self.classify();
        if !class.connected {
            Err(Error::UnsupportedGraph(
                crate::error::GraphDefect::Disconnected,
            ))
        } else if class.bipartite {
            Err(Error::UnsupportedGraph(
                crate::error::GraphDefect::Bipartite,
            ))
        } else {
            Ok(())
        }
    }

    /// Enumerates independent sets with the default cap.
    pub fn independent_sets(&self) -> Result<IndependentSetIndex> {
        IndependentSetIndex::build(self, EnumerationLimits::default())
    }
}

impl fmt::Debug for CompatibilityGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(i, j)| (i + 1, j + 1))
            .collect();
        f.debug_struct("CompatibilityGraph")
            .field("n", &self.n)
            .field("edges", &edges)
            .finish()
    }
}

/// Bounds on independent-set enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Maximum number of nonempty sets before failing with a resource error.
    pub max_sets: usize,
    /// Only enumerate sets of at most this cardinality.
    pub max_cardinality: Option<usize>,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_sets: DEFAULT_SET_CAP,
            max_cardinality: None,
        }
    }
}

impl EnumerationLimits {
    pub fn with_cap(max_sets: usize) -> Self {
        EnumerationLimits {
            max_sets,
            max_cardinality: None,
        }
    }
}

/// All independent sets of a graph plus the empty set, ordered by
/// nondecreasing cardinality, with `I \ {i}` lookups for dynamic programming.
///
/// Position 0 is always the empty set. For every listed set and every member
/// `i`, the set without `i` is listed at a strictly smaller position.
#[derive(Clone, Debug)]
pub struct IndependentSetIndex {
    n: usize,
    sets: Vec<ClassSet>,
    neighbors: Vec<ClassSet>,
    positions: HashMap<ClassSet, usize>,
    removal_offsets: Vec<usize>,
    removals: Vec<(usize, usize)>,
    truncated: bool,
}

impl IndependentSetIndex {
    pub fn build(graph: &CompatibilityGraph, limits: EnumerationLimits) -> Result<Self> {
        let n = graph.n_classes();
        let max_card = limits.max_cardinality.unwrap_or(n);
        let mut found = Vec::new();
        let mut stack = vec![(ClassSet::EMPTY, ClassSet::EMPTY, 0usize)];
        let mut truncated = false;
        // (set, set ∪ E(set), next candidate)
        while let Some((set, blocked, next)) = stack.pop() {
            if set.len() == max_card {
                if (next..n).any(|v| !blocked.contains(v)) {
                    truncated = true;
                }
                continue;
            }
            for v in (next..n).rev() {
                if blocked.contains(v) {
                    continue;
                }
                if found.len() == limits.max_sets {
                    return Err(Error::ResourceCap {
                        limit: limits.max_sets,
                    });
                }
                let grown = set.with(v);
                found.push(grown);
                stack.push((grown, blocked.with(v).union(graph.neighbors(v)), v + 1));
            }
        }
        found.sort_by_key(|s| (s.len(), s.bits()));

        let mut sets = Vec::with_capacity(found.len() + 1);
        sets.push(ClassSet::EMPTY);
        sets.extend(found);
        let positions: HashMap<_, _> = sets.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let neighbors = sets.iter().map(|&s| graph.neighbors_of_set(s)).collect();

        let mut removal_offsets = Vec::with_capacity(sets.len() + 1);
        let mut removals = Vec::new();
        for &set in &sets {
            removal_offsets.push(removals.len());
            for i in set {
                removals.push((i, positions[&set.without(i)]));
            }
        }
        removal_offsets.push(removals.len());

        Ok(IndependentSetIndex {
            n,
            sets,
            neighbors,
            positions,
            removal_offsets,
            removals,
            truncated,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    /// Number of entries including the empty set.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    /// Always false: the empty set is always present.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of nonempty independent sets.
    pub fn nonempty_count(&self) -> usize {
        self.sets.len() - 1
    }

    /// True when a cardinality restriction excluded some independent sets.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn sets(&self) -> &[ClassSet] {
        &self.sets
    }

    pub fn set(&self, pos: usize) -> ClassSet {
        self.sets[pos]
    }

    /// `E(I)` for the set at `pos`.
    pub fn neighbors(&self, pos: usize) -> ClassSet {
        self.neighbors[pos]
    }

    pub fn position(&self, set: ClassSet) -> Option<usize> {
        self.positions.get(&set).copied()
    }

    /// `(i, position of I \ {i})` for each member `i` of the set at `pos`.
    pub fn removals(&self, pos: usize) -> &[(usize, usize)] {
        &self.removals[self.removal_offsets[pos]..self.removal_offsets[pos + 1]]
    }

    /// Positions of the nonempty sets, in DP order.
    pub fn nonempty_positions(&self) -> std::ops::Range<usize> {
        1..self.sets.len()
    }

    /// Sets that are maximal with respect to inclusion among the listed sets.
    pub fn maximal_sets(&self) -> Vec<ClassSet> {
        let all = ClassSet::full(self.n);
        self.sets
            .iter()
            .zip(&self.neighbors)
            .filter(|(s, e)| !s.is_empty() && s.union(**e) == all)
            .map(|(s, _)| *s)
            .collect()
    }
}
