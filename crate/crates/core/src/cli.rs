//! Command implementations behind the `matchq` binary: sweeps over a load
//! parameter, CSV output, and text reports.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{check_stability_with, MetricsTable, StabilityReport};
use crate::error::{Error, Result};
use crate::graph::{
    ClassSet, CompatibilityGraph, EnumerationLimits, IndependentSetIndex, DEFAULT_SET_CAP,
};
use crate::heavy_traffic::{scaled_rates, ScalingSpec};
use crate::heuristics::{self, OptimizationResult, OptimizerOptions};
use crate::rates::RateVector;
use crate::simulator::{self, SimulationConfig, SimulationEstimates};

pub const STATE_CAP_ENV: &str = "MATCHQ_STATE_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

/// Enumeration cap, overridable through `MATCHQ_STATE_CAP`.
pub fn state_cap() -> Result<usize> {
    match std::env::var(STATE_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{STATE_CAP_ENV}={v:?} is not a count"))),
        Err(_) => Ok(DEFAULT_SET_CAP),
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::ClassCount { .. }
        | Error::ClassOutOfRange { .. }
        | Error::SelfEdge(_)
        | Error::InvalidRates(_) => EXIT_PARSE,
        Error::Unstable { .. } | Error::UnsupportedGraph(_) => EXIT_UNSTABLE,
        Error::ResourceCap { .. } => EXIT_RESOURCE,
        _ => EXIT_FAILURE,
    }
}

pub fn build_index(graph: &CompatibilityGraph, cap: usize) -> Result<IndependentSetIndex> {
    IndependentSetIndex::build(graph, EnumerationLimits::with_cap(cap))
}

/// Parses `A:B:STEP` (inclusive) or a single value.
pub fn parse_rho_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::Parse(format!("{s:?} is not a number in grid {text:?}")))
    };
    let grid = match parts.as_slice() {
        [single] => vec![num(single)?],
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(Error::Parse(format!(
                    "grid {text:?} must have A <= B and STEP > 0"
                )));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        _ => {
            return Err(Error::Parse(format!(
                "grid {text:?} is not of the form A:B:STEP"
            )))
        }
    };
    if let Some(r) = grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::Parse(format!("grid value {r} is outside (0, 1)")));
    }
    Ok(grid)
}

/// 99 points from 0.01 to 0.99.
pub fn default_rho_grid() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

/// Parses a comma-separated list of 1-based classes.
pub fn parse_class_list(text: &str, n: usize) -> Result<ClassSet> {
    let mut set = ClassSet::EMPTY;
    for f in text.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        let k: usize = f
            .parse()
            .map_err(|_| Error::Parse(format!("{f:?} is not a class index")))?;
        if k == 0 || k > n {
            return Err(Error::ClassOutOfRange { index: k, n });
        }
        set = set.with(k - 1);
    }
    Ok(set)
}

/// How arrival rates depend on the load parameter of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum RateRule {
    /// Fixed rates; the sweep has one row.
    Explicit(RateVector),
    /// Odd cycle `N = 2K+1`: class 1 at `(ρ/K)/(1+ρ/K)`, the others at
    /// `(1/(2K))/(1+ρ/K)`.
    Cycle,
    /// Class 1 at `(ρ/(N−1))/(1+ρ/(N−1))`, the others at
    /// `(1/(N−1))/(1+ρ/(N−1))`.
    Racket,
    /// Uniform heavy-traffic scaling around a maximal independent set.
    HeavyTraffic { saturated: ClassSet },
}

impl RateRule {
    pub fn name(&self) -> &'static str {
        match self {
            RateRule::Explicit(_) => "explicit",
            RateRule::Cycle => "cycle",
            RateRule::Racket => "racket",
            RateRule::HeavyTraffic { .. } => "heavy-traffic",
        }
    }

    pub fn rates(&self, graph: &CompatibilityGraph, rho: f64) -> Result<RateVector> {
        let n = graph.n_classes();
        match self {
            RateRule::Explicit(r) => Ok(r.clone()),
            RateRule::Cycle => cycle_rates(n, rho),
            RateRule::Racket => racket_rates(n, rho),
            RateRule::HeavyTraffic { saturated } => {
                scaled_rates(&ScalingSpec::uniform(graph, *saturated, rho)?)
            }
        }
    }
}

pub fn cycle_rates(n: usize, rho: f64) -> Result<RateVector> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "the cycle rule needs an odd class count, got {n}"
        )));
    }
    let k = ((n - 1) / 2) as f64;
    let scale = 1.0 + rho / k;
    let mut rates = vec![1.0 / (2.0 * k) / scale; n];
    rates[0] = rho / k / scale;
    RateVector::new(rates)
}

pub fn racket_rates(n: usize, rho: f64) -> Result<RateVector> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "the racket rule needs at least 3 classes, got {n}"
        )));
    }
    let m = (n - 1) as f64;
    let scale = 1.0 + rho / m;
    let mut rates = vec![1.0 / m / scale; n];
    rates[0] = rho / m / scale;
    RateVector::new(rates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub graph: CompatibilityGraph,
    pub rule: RateRule,
    pub rho_grid: Vec<f64>,
}

impl SweepSpec {
    pub fn new(graph: CompatibilityGraph, rule: RateRule, rho_grid: Vec<f64>) -> Result<Self> {
        if let Some(r) = rho_grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::Domain(format!("grid value {r} is outside (0, 1)")));
        }
        match &rule {
            RateRule::Explicit(r) if r.len() != graph.n_classes() => {
                return Err(Error::InvalidRates(format!(
                    "expected {} rates, got {}",
                    graph.n_classes(),
                    r.len()
                )))
            }
            RateRule::Cycle => {
                cycle_rates(graph.n_classes(), 0.5)?;
            }
            RateRule::HeavyTraffic { saturated } => {
                ScalingSpec::uniform(&graph, *saturated, 0.5)?;
            }
            _ => {}
        }
        Ok(SweepSpec {
            graph,
            rule,
            rho_grid,
        })
    }
}

/// One CSV row; metric cells are `None` at unstable points.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub load: f64,
    pub waiting_probability: Vec<Option<f64>>,
    pub mean_matching_time: Vec<Option<f64>>,
    pub waiting_probability_overall: Option<f64>,
    pub mean_matching_time_overall: Option<f64>,
    pub stable: bool,
}

impl SweepRow {
    fn unstable(load: f64, n: usize) -> Self {
        SweepRow {
            load,
            waiting_probability: vec![None; n],
            mean_matching_time: vec![None; n],
            waiting_probability_overall: None,
            mean_matching_time_overall: None,
            stable: false,
        }
    }

    pub fn from_metrics(load: f64, alpha: &RateVector, m: &MetricsTable) -> Self {
        SweepRow {
            load,
            waiting_probability: m.omega.iter().map(|w| Some(*w)).collect(),
            mean_matching_time: m.eti.clone(),
            waiting_probability_overall: Some(m.mean_waiting_probability(alpha)),
            mean_matching_time_overall: Some(m.et),
            stable: true,
        }
    }
}

fn sweep_point(
    graph: &CompatibilityGraph,
    index: &IndependentSetIndex,
    alpha: &RateVector,
    load: f64,
) -> Result<SweepRow> {
    let n = graph.n_classes();
    if !check_stability_with(graph, index, alpha).stable {
        return Ok(SweepRow::unstable(load, n));
    }
    match MetricsTable::compute(index, alpha) {
        Ok(m) => Ok(SweepRow::from_metrics(load, alpha, &m)),
        Err(Error::Unstable { .. }) | Err(Error::DegenerateDenominator(_)) => {
            Ok(SweepRow::unstable(load, n))
        }
        Err(e) => Err(e),
    }
}

/// Rows in grid order. The explicit rule yields a single row whose load is
/// the maximum load of the given rates.
pub fn run_sweep(spec: &SweepSpec, cap: usize) -> Result<Vec<SweepRow>> {
    let index = build_index(&spec.graph, cap)?;
    if let RateRule::Explicit(alpha) = &spec.rule {
        let load = check_stability_with(&spec.graph, &index, alpha).max_load;
        return Ok(vec![sweep_point(&spec.graph, &index, alpha, load)?]);
    }
    spec.rho_grid
        .par_iter()
        .map(|&rho| {
            let alpha = spec.rule.rates(&spec.graph, rho)?;
            sweep_point(&spec.graph, &index, &alpha, rho)
        })
        .collect()
}

pub fn sweep_header(n: usize) -> Vec<String> {
    let mut h = vec!["load".to_string()];
    h.extend((1..=n).map(|k| format!("waiting_probability_{k}")));
    h.extend((1..=n).map(|k| format!("mean_matching_time_{k}")));
    h.extend(
        [
            "waiting_probability_overall",
            "mean_matching_time_overall",
            "stable",
        ]
        .map(String::from),
    );
    h
}

/// 12 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

fn cell(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

fn row_cells(row: &SweepRow) -> Vec<String> {
    let mut cells = vec![format_value(row.load)];
    cells.extend(row.waiting_probability.iter().map(|v| cell(*v)));
    cells.extend(row.mean_matching_time.iter().map(|v| cell(*v)));
    cells.push(cell(row.waiting_probability_overall));
    cells.push(cell(row.mean_matching_time_overall));
    cells.push(row.stable.to_string());
    cells
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

pub fn write_sweep_csv<W: Write>(out: W, n: usize, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sweep_header(n)).map_err(csv_error)?;
    for row in rows {
        w.write_record(row_cells(row)).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a sweep CSV back; returns the class count and the rows.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<(usize, Vec<SweepRow>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.len() < 6 || (header.len() - 4) % 2 != 0 {
        return Err(Error::Parse(format!(
            "unexpected header with {} columns",
            header.len()
        )));
    }
    let n = (header.len() - 4) / 2;
    if header.iter().collect::<Vec<_>>() != sweep_header(n) {
        return Err(Error::Parse(
            "header does not match the sweep schema".into(),
        ));
    }
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("{s:?} is not a number")))
        }
    };
    let mut rows = Vec::new();
    for record in r.records() {
        let rec = record.map_err(csv_error)?;
        let f: Vec<&str> = rec.iter().collect();
        rows.push(SweepRow {
            load: parse(f[0])?.ok_or_else(|| Error::Parse("missing load".into()))?,
            waiting_probability: f[1..=n].iter().map(|s| parse(s)).collect::<Result<_>>()?,
            mean_matching_time: f[n + 1..=2 * n]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<_>>()?,
            waiting_probability_overall: parse(f[2 * n + 1])?,
            mean_matching_time_overall: parse(f[2 * n + 2])?,
            stable: f[2 * n + 3]
                .parse()
                .map_err(|_| Error::Parse(format!("{:?} is not a flag", f[2 * n + 3])))?,
        });
    }
    Ok((n, rows))
}

/// Stability verdict and, when stable, every metric.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeReport {
    pub rates: RateVector,
    pub stability: StabilityReport,
    pub metrics: Option<MetricsTable>,
}

impl AnalyzeReport {
    /// `Σ α_i ω_i`.
    pub fn conservation(&self) -> Option<f64> {
        self.metrics
            .as_ref()
            .map(|m| m.mean_waiting_probability(&self.rates))
    }

    pub fn summary(&self) -> AnalyzeSummary {
        AnalyzeSummary {
            rates: self.rates.as_slice().to_vec(),
            stable: self.stability.stable,
            max_load: self.stability.max_load,
            defect: self.stability.graph_defect.map(|d| d.to_string()),
            pi_empty: self.metrics.as_ref().map(|m| m.pi_empty),
            waiting_probability: self.metrics.as_ref().map(|m| m.omega.clone()),
            mean_unmatched: self.metrics.as_ref().map(|m| m.li.clone()),
            mean_matching_time: self.metrics.as_ref().map(|m| m.eti.clone()),
            mean_unmatched_total: self.metrics.as_ref().map(|m| m.l),
            mean_matching_time_overall: self.metrics.as_ref().map(|m| m.et),
        }
    }
}

/// Serializable view of an [`AnalyzeReport`].
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeSummary {
    pub rates: Vec<f64>,
    pub stable: bool,
    pub max_load: f64,
    pub defect: Option<String>,
    pub pi_empty: Option<f64>,
    pub waiting_probability: Option<Vec<f64>>,
    pub mean_unmatched: Option<Vec<f64>>,
    pub mean_matching_time: Option<Vec<Option<f64>>>,
    pub mean_unmatched_total: Option<f64>,
    pub mean_matching_time_overall: Option<f64>,
}

fn write_stability(f: &mut fmt::Formatter<'_>, s: &StabilityReport) -> fmt::Result {
    if let Some(defect) = s.graph_defect {
        return writeln!(f, "unstable: {defect}");
    }
    if s.stable {
        writeln!(f, "stable: max load {:.6} at {}", s.max_load, s.argmax_set)
    } else {
        writeln!(
            f,
            "unstable: load {:.6} at {} is not below 1",
            s.max_load, s.argmax_set
        )
    }
}

impl fmt::Display for AnalyzeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rates: Vec<String> = self
            .rates
            .as_slice()
            .iter()
            .map(|a| format!("{a:.6}"))
            .collect();
        writeln!(f, "rates: {}", rates.join(" "))?;
        write_stability(f, &self.stability)?;
        let Some(m) = &self.metrics else {
            return writeln!(f, "metrics suppressed");
        };
        writeln!(f, "pi(empty): {:.12}", m.pi_empty)?;
        writeln!(
            f,
            "class  rate          waiting_prob  mean_unmatched  mean_matching_time"
        )?;
        for c in 0..self.rates.len() {
            let et = m.eti[c].map_or("-".to_string(), |t| format!("{t:.10}"));
            writeln!(
                f,
                "{:<5}  {:.10}  {:.10}  {:<14.10}  {et}",
                c + 1,
                self.rates[c],
                m.omega[c],
                m.li[c]
            )?;
        }
        writeln!(f, "mean unmatched items: {:.12}", m.l)?;
        writeln!(f, "mean matching time: {:.12}", m.et)?;
        let sum = m.mean_waiting_probability(&self.rates);
        let ok = if (sum - 0.5).abs() <= 1e-9 {
            "ok"
        } else {
            "FAILED"
        };
        writeln!(f, "check sum_i alpha_i omega_i = 1/2: {sum:.12} ({ok})")
    }
}

pub fn run_analyze(
    graph: &CompatibilityGraph,
    rates: &RateVector,
    cap: usize,
) -> Result<AnalyzeReport> {
    if rates.len() != graph.n_classes() {
        return Err(Error::InvalidRates(format!(
            "expected {} rates, got {}",
            graph.n_classes(),
            rates.len()
        )));
    }
    let index = build_index(graph, cap)?;
    let stability = check_stability_with(graph, &index, rates);
    let metrics = if stability.stable {
        Some(MetricsTable::compute(&index, rates)?)
    } else {
        None
    };
    Ok(AnalyzeReport {
        rates: rates.clone(),
        stability,
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeMode {
    Degree,
    MinMax,
}

impl std::str::FromStr for OptimizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(OptimizeMode::Degree),
            "minmax" => Ok(OptimizeMode::MinMax),
            other => Err(Error::Parse(format!(
                "unknown mode {other:?}, expected degree or minmax"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub mode: OptimizeMode,
    pub optimization: Option<OptimizationResult>,
    pub analysis: AnalyzeReport,
}

impl OptimizeReport {
    pub fn rates(&self) -> &RateVector {
        &self.analysis.rates
    }
}

impl fmt::Display for OptimizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.optimization {
            None => writeln!(f, "mode: degree-proportional")?,
            Some(o) => {
                writeln!(f, "mode: min-max load")?;
                writeln!(
                    f,
                    "max load {:.10} (bound {:.10}, start {:.10}), {} iterations{}",
                    o.achieved_max_load,
                    o.objective_bound,
                    o.initial_max_load,
                    o.iterations,
                    if o.converged { "" } else { ", not converged" }
                )?;
                if o.restricted {
                    match o.full_max_load {
                        Some(l) => {
                            writeln!(f, "restricted family; max load over all sets {l:.10}")?
                        }
                        None => writeln!(f, "restricted family; full family not enumerable")?,
                    }
                }
                if o.stability_warning() {
                    writeln!(f, "warning: the returned rates may be unstable")?;
                }
            }
        }
        write!(f, "{}", self.analysis)
    }
}

pub fn run_optimize(
    graph: &CompatibilityGraph,
    mode: OptimizeMode,
    options: &OptimizerOptions,
) -> Result<OptimizeReport> {
    let (rates, optimization) = match mode {
        OptimizeMode::Degree => (heuristics::degree_proportional_rates(graph)?, None),
        OptimizeMode::MinMax => {
            let r = heuristics::minimize_max_load(graph, options)?;
            (r.rates.clone(), Some(r))
        }
    };
    let analysis = run_analyze(graph, &rates, options.set_cap)?;
    Ok(OptimizeReport {
        mode,
        optimization,
        analysis,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateReport {
    pub rates: RateVector,
    /// Largest load over the independent sets.
    pub max_load: f64,
    pub estimates: SimulationEstimates,
    /// Exact metrics, when the rates are stable.
    pub exact: Option<MetricsTable>,
}

impl fmt::Display for SimulateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.estimates;
        writeln!(
            f,
            "steps {} after warmup {}, seed {}, {:.0}% half-widths",
            e.steps,
            e.warmup,
            e.seed,
            e.confidence * 100.0
        )?;
        if !e.stable {
            writeln!(f, "warning: rates are unstable; estimates do not converge")?;
        }
        let exact = |v: Option<f64>| v.map_or(String::new(), |v| format!("  exact {v:.8}"));
        let m = self.exact.as_ref();
        writeln!(
            f,
            "pi(empty)      {:.8} +- {:.8}{}",
            e.pi_hat[0].mean,
            e.pi_hat[0].half_width,
            exact(m.map(|m| m.pi_empty))
        )?;
        for c in 0..self.rates.len() {
            if let Some(w) = e.omega_hat[c] {
                writeln!(
                    f,
                    "omega_{:<8} {:.8} +- {:.8}{}",
                    c + 1,
                    w.mean,
                    w.half_width,
                    exact(m.map(|m| m.omega[c]))
                )?;
            }
        }
        for c in 0..self.rates.len() {
            writeln!(
                f,
                "L_{:<12} {:.8} +- {:.8}{}",
                c + 1,
                e.li_hat[c].mean,
                e.li_hat[c].half_width,
                exact(m.map(|m| m.li[c]))
            )?;
        }
        writeln!(
            f,
            "L              {:.8} +- {:.8}{}",
            e.l_hat.mean,
            e.l_hat.half_width,
            exact(m.map(|m| m.l))
        )?;
        writeln!(
            f,
            "sum alpha_i omega_i {:.8} +- {:.8}  exact 0.5",
            e.waiting_overall.mean, e.waiting_overall.half_width
        )
    }
}

pub fn run_simulate(
    graph: &CompatibilityGraph,
    rates: &RateVector,
    config: &SimulationConfig,
    replications: usize,
    cap: usize,
) -> Result<SimulateReport> {
    let index = build_index(graph, cap)?;
    let max_load = check_stability_with(graph, &index, rates).max_load;
    let estimates = simulator::replicate_with(graph, &index, rates, config, replications)?;
    let exact = if estimates.stable {
        Some(MetricsTable::compute(&index, rates)?)
    } else {
        None
    };
    Ok(SimulateReport {
        rates: rates.clone(),
        max_load,
        estimates,
        exact,
    })
}

/// Sweep schema plus half-width columns, one row.
pub fn write_simulation_csv<W: Write>(out: W, report: &SimulateReport) -> Result<()> {
    let n = report.rates.len();
    let e = &report.estimates;
    let eti = e.eti_hat(&report.rates);
    let mut header = sweep_header(n);
    header.extend((1..=n).map(|k| format!("waiting_probability_{k}_half_width")));
    header.extend((1..=n).map(|k| format!("mean_matching_time_{k}_half_width")));
    header.push("waiting_probability_overall_half_width".into());
    header.push("mean_matching_time_overall_half_width".into());

    let row = SweepRow {
        load: report.max_load,
        waiting_probability: e.omega_hat.iter().map(|w| w.map(|w| w.mean)).collect(),
        mean_matching_time: eti.iter().map(|t| t.map(|t| t.mean)).collect(),
        waiting_probability_overall: Some(e.waiting_overall.mean),
        mean_matching_time_overall: Some(e.l_hat.mean),
        stable: e.stable,
    };
    let mut cells = row_cells(&row);
    cells.extend(e.omega_hat.iter().map(|w| cell(w.map(|w| w.half_width))));
    cells.extend(eti.iter().map(|t| cell(t.map(|t| t.half_width))));
    cells.push(format_value(e.waiting_overall.half_width));
    cells.push(format_value(e.l_hat.half_width));

    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    w.write_record(cells).map_err(csv_error)?;
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}
