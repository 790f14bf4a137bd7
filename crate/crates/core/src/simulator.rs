//! Discrete-time FCFM simulation.
//!
//! Every state of the matching process leaves at total rate one, so the jump
//! chain observed at arrival epochs has the same stationary law as the
//! continuous-time process. Each step draws one arriving class with
//! probability `α_i`, records the state it finds, then applies the FCFM rule.

use log::warn;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::analytics;
use crate::error::{Error, Result};
use crate::graph::{ClassSet, CompatibilityGraph, IndependentSetIndex};
use crate::rates::RateVector;

pub const DEFAULT_BATCHES: usize = 30;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Unmatched items, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BufferState {
    word: Vec<usize>,
    counts: Vec<usize>,
}

/// Outcome of one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrival {
    /// Matched with the item at `position` (0 = oldest), of class `partner`.
    Matched { position: usize, partner: usize },
    /// No compatible item; the arrival joins the end of the buffer.
    Queued,
}

impl BufferState {
    pub fn new(n_classes: usize) -> Self {
        BufferState {
            word: Vec::new(),
            counts: vec![0; n_classes],
        }
    }

    /// Builds a state from a word without checking feasibility.
    pub fn from_word(n_classes: usize, word: Vec<usize>) -> Self {
        let mut counts = vec![0; n_classes];
        for &c in &word {
            counts[c] += 1;
        }
        BufferState { word, counts }
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn count(&self, class: usize) -> usize {
        self.counts[class]
    }

    /// Classes present in the buffer.
    pub fn classes(&self) -> ClassSet {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(c, _)| c)
            .collect()
    }

    /// True when the present classes are pairwise incompatible.
    pub fn is_feasible(&self, graph: &CompatibilityGraph) -> bool {
        let present = self.classes();
        present.is_empty() || graph.is_independent(present)
    }

    /// Applies the FCFM rule in place.
    pub fn arrive(&mut self, graph: &CompatibilityGraph, class: usize) -> Arrival {
        let neighbors = graph.neighbors(class);
        let has_partner = neighbors.iter().any(|j| self.counts[j] > 0);
        if has_partner {
            let position = self
                .word
                .iter()
                .position(|&c| neighbors.contains(c))
                .expect("partner class is present");
            let partner = self.word.remove(position);
            self.counts[partner] -= 1;
            Arrival::Matched { position, partner }
        } else {
            self.word.push(class);
            self.counts[class] += 1;
            Arrival::Queued
        }
    }

    /// The state after an arrival of `class`.
    pub fn step(&self, graph: &CompatibilityGraph, class: usize) -> BufferState {
        let mut next = self.clone();
        next.arrive(graph, class);
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub steps: u64,
    /// Steps discarded before estimation; defaults to 10% of `steps`.
    pub warmup: Option<u64>,
    pub seed: u64,
    pub batches: usize,
    /// Confidence level of the reported half-widths.
    pub confidence: f64,
}

impl SimulationConfig {
    pub fn new(steps: u64, seed: u64) -> Self {
        SimulationConfig {
            steps,
            warmup: None,
            seed,
            batches: DEFAULT_BATCHES,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn warmup_steps(&self) -> u64 {
        self.warmup.unwrap_or(self.steps / 10)
    }

    fn validate(&self) -> Result<()> {
        let warmup = self.warmup_steps();
        if self.steps <= warmup {
            return Err(Error::Domain(format!(
                "steps ({}) must exceed warmup ({warmup})",
                self.steps
            )));
        }
        if self.batches < 2 || self.steps - warmup < self.batches as u64 {
            return Err(Error::Domain(format!(
                "need at least 2 batches and one step per batch, got {} batches for {} steps",
                self.batches,
                self.steps - warmup
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Domain(format!(
                "confidence {} must lie in (0, 1)",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Point estimate with a confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    /// `|mean − value|` in half-widths.
    pub fn deviation(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.half_width > 0.0 {
            d / self.half_width
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn covers(&self, value: f64, half_widths: f64) -> bool {
        self.deviation(value) <= half_widths
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationEstimates {
    pub steps: u64,
    pub warmup: u64,
    pub seed: u64,
    pub confidence: f64,
    /// Whether the rates satisfy the stability condition.
    pub stable: bool,
    /// Independent sets in enumeration order, `∅` first.
    pub sets: Vec<ClassSet>,
    /// Fraction of arrivals finding each set of present classes.
    pub pi_hat: Vec<Estimate>,
    /// Fraction of class-`i` arrivals that find no compatible item; `None`
    /// for classes that never arrived.
    pub omega_hat: Vec<Option<Estimate>>,
    /// Mean number of unmatched class-`i` items.
    pub li_hat: Vec<Estimate>,
    pub l_hat: Estimate,
    /// Fraction of all arrivals that find no compatible item.
    pub waiting_overall: Estimate,
    pub max_buffer_len: usize,
}

impl SimulationEstimates {
    /// Mean matching time per class by Little's law, `L_i/α_i`.
    pub fn eti_hat(&self, alpha: &RateVector) -> Vec<Option<Estimate>> {
        self.li_hat
            .iter()
            .zip(alpha.as_slice())
            .map(|(e, &a)| {
                (a > 0.0).then(|| Estimate {
                    mean: e.mean / a,
                    half_width: e.half_width / a,
                })
            })
            .collect()
    }

    /// `π̂(∅)`.
    pub fn pi_empty(&self) -> Estimate {
        self.pi_hat[0]
    }

    /// Largest deviation, in half-widths, between these estimates and the
    /// exact metrics, over `π(I)`, `ω_i`, `L_i` and `L`.
    pub fn worst_deviation(&self, exact: &analytics::MetricsTable) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, &v) in self.pi_hat.iter().zip(&exact.pi.values) {
            worst = worst.max(e.deviation(v));
        }
        for (e, &v) in self.omega_hat.iter().zip(&exact.omega) {
            if let Some(e) = e {
                worst = worst.max(e.deviation(v));
            }
        }
        for (e, &v) in self.li_hat.iter().zip(&exact.li) {
            worst = worst.max(e.deviation(v));
        }
        worst.max(self.l_hat.deviation(exact.l))
    }
}

#[derive(Clone)]
struct BatchTotals {
    steps: u64,
    set_hits: Vec<u64>,
    class_items: Vec<u64>,
    arrivals: Vec<u64>,
    queued: Vec<u64>,
}

impl BatchTotals {
    fn new(n_sets: usize, n: usize) -> Self {
        BatchTotals {
            steps: 0,
            set_hits: vec![0; n_sets],
            class_items: vec![0; n],
            arrivals: vec![0; n],
            queued: vec![0; n],
        }
    }
}

/// Simulates the jump chain and estimates the stationary metrics by batch
/// means. Runs on unstable rates too, with a warning.
pub fn simulate(
    graph: &CompatibilityGraph,
    alpha: &RateVector,
    config: &SimulationConfig,
) -> Result<SimulationEstimates> {
    let index = graph.independent_sets()?;
    simulate_with(graph, &index, alpha, config)
}

/// Same as [`simulate`] with a prebuilt index.
pub fn simulate_with(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    alpha: &RateVector,
    config: &SimulationConfig,
) -> Result<SimulationEstimates> {
    let batches = run_batches(graph, index, alpha, config)?;
    Ok(summarize(
        index, &batches.0, config, batches.1, batches.2, 1,
    ))
}

fn run_batches(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    alpha: &RateVector,
    config: &SimulationConfig,
) -> Result<(Vec<BatchTotals>, bool, usize)> {
    config.validate()?;
    let n = graph.n_classes();
    if alpha.len() != n {
        return Err(Error::InvalidRates(format!(
            "expected {n} rates, got {}",
            alpha.len()
        )));
    }
    let stable = analytics::check_stability_with(graph, index, alpha).stable;
    if !stable {
        warn!("rates are unstable; simulation estimates do not converge");
    }
    let sampler =
        WeightedIndex::new(alpha.as_slice()).map_err(|e| Error::InvalidRates(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = BufferState::new(n);

    let warmup = config.warmup_steps();
    for _ in 0..warmup {
        let class = sampler.sample(&mut rng);
        state.arrive(graph, class);
    }

    let measured = config.steps - warmup;
    let b = config.batches as u64;
    let mut totals = vec![BatchTotals::new(index.len(), n); config.batches];
    let mut present = state.classes();
    let mut present_pos = position_of(index, present)?;
    let mut max_len = state.len();
    for k in 0..measured {
        let batch = &mut totals[(k * b / measured) as usize];
        let class = sampler.sample(&mut rng);
        batch.steps += 1;
        batch.set_hits[present_pos] += 1;
        for c in present {
            batch.class_items[c] += state.count(c) as u64;
        }
        batch.arrivals[class] += 1;
        match state.arrive(graph, class) {
            Arrival::Queued => {
                batch.queued[class] += 1;
                if !present.contains(class) {
                    present = present.with(class);
                    present_pos = position_of(index, present)?;
                }
                max_len = max_len.max(state.len());
            }
            Arrival::Matched { partner, .. } => {
                if state.count(partner) == 0 {
                    present = present.without(partner);
                    present_pos = position_of(index, present)?;
                }
            }
        }
        debug_assert!(state.is_feasible(graph));
    }
    Ok((totals, stable, max_len))
}

fn position_of(index: &IndependentSetIndex, set: ClassSet) -> Result<usize> {
    index
        .position(set)
        .ok_or(Error::ResourceCap { limit: index.len() })
}

fn summarize(
    index: &IndependentSetIndex,
    batches: &[BatchTotals],
    config: &SimulationConfig,
    stable: bool,
    max_buffer_len: usize,
    replications: usize,
) -> SimulationEstimates {
    let n = index.n_classes();
    let per_rep = batches.len() / replications;
    let df = (replications * (per_rep - 1)) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .map(|d| d.inverse_cdf(0.5 + config.confidence / 2.0))
        .unwrap_or(f64::NAN);
    let total_steps: u64 = batches.iter().map(|b| b.steps).sum();

    // Point estimates pool every batch; the variance is pooled within
    // replications.
    let estimate = |num: &dyn Fn(&BatchTotals) -> f64, den: &dyn Fn(&BatchTotals) -> f64| {
        let total_den: f64 = batches.iter().map(den).sum();
        let mean = batches.iter().map(num).sum::<f64>() / total_den;
        let mut ss = 0.0;
        let mut count = 0usize;
        let mut groups = 0usize;
        for rep in batches.chunks(per_rep) {
            let ratios: Vec<f64> = rep
                .iter()
                .filter(|b| den(b) > 0.0)
                .map(|b| num(b) / den(b))
                .collect();
            if ratios.len() < 2 {
                continue;
            }
            let m = ratios.iter().sum::<f64>() / ratios.len() as f64;
            ss += ratios.iter().map(|r| (r - m).powi(2)).sum::<f64>();
            count += ratios.len();
            groups += 1;
        }
        let half_width = if count > groups {
            let var = ss / (count - groups) as f64;
            t * (var / count as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Estimate { mean, half_width }
    };
    let steps = |b: &BatchTotals| b.steps as f64;

    let pi_hat = (0..index.len())
        .map(|p| estimate(&|b| b.set_hits[p] as f64, &steps))
        .collect();
    let omega_hat = (0..n)
        .map(|c| {
            let arrived: u64 = batches.iter().map(|b| b.arrivals[c]).sum();
            (arrived > 0).then(|| estimate(&|b| b.queued[c] as f64, &|b| b.arrivals[c] as f64))
        })
        .collect();
    let li_hat = (0..n)
        .map(|c| estimate(&|b| b.class_items[c] as f64, &steps))
        .collect();
    let l_hat = estimate(&|b| b.class_items.iter().sum::<u64>() as f64, &steps);
    let waiting_overall = estimate(&|b| b.queued.iter().sum::<u64>() as f64, &steps);

    SimulationEstimates {
        steps: total_steps,
        warmup: config.warmup_steps(),
        seed: config.seed,
        confidence: config.confidence,
        stable,
        sets: index.sets().to_vec(),
        pi_hat,
        omega_hat,
        li_hat,
        l_hat,
        waiting_overall,
        max_buffer_len,
    }
}

/// Runs `count` independent replications with seeds `seed, seed+1, …` in
/// parallel and merges them: point estimates over all batches, variance
/// pooled across replications.
pub fn replicate(
    graph: &CompatibilityGraph,
    alpha: &RateVector,
    config: &SimulationConfig,
    count: usize,
) -> Result<SimulationEstimates> {
    let index = graph.independent_sets()?;
    replicate_with(graph, &index, alpha, config, count)
}

/// Same as [`replicate`] with a prebuilt index.
pub fn replicate_with(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    alpha: &RateVector,
    config: &SimulationConfig,
    count: usize,
) -> Result<SimulationEstimates> {
    if count == 0 {
        return Err(Error::Domain("at least one replication is required".into()));
    }
    let runs: Vec<_> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let cfg = SimulationConfig {
                seed: config.seed.wrapping_add(k),
                ..*config
            };
            run_batches(graph, index, alpha, &cfg)
        })
        .collect::<Result<_>>()?;
    let stable = runs.iter().all(|r| r.1);
    let max_len = runs.iter().map(|r| r.2).max().unwrap_or(0);
    let batches: Vec<BatchTotals> = runs.into_iter().flat_map(|r| r.0).collect();
    Ok(summarize(index, &batches, config, stable, max_len, count))
}
