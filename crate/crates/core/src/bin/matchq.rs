use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use matchq::cli::{self, OptimizeMode, RateRule, SweepSpec};
use matchq::heuristics::OptimizerOptions;
use matchq::io::{format_rates, read_graph, read_rates};
use matchq::simulator::SimulationConfig;
use matchq::{CompatibilityGraph, Error, Result};

#[derive(Parser)]
#[command(
    name = "matchq",
    version,
    about = "Stochastic matching models under first-come-first-matched"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stability check and stationary metrics for one rate vector.
    Analyze {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rates: PathBuf,
        /// Write a JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 3 when the rates are unstable.
        #[arg(long)]
        instability_error: bool,
    },
    /// Metrics along a load grid, written as CSV.
    Sweep {
        #[command(flatten)]
        input: Input,
        /// cycle, racket, heavy-traffic or explicit.
        #[arg(long)]
        rule: Option<String>,
        /// Rates file; implies the explicit rule.
        #[arg(long)]
        rates: Option<PathBuf>,
        /// Saturated classes for the heavy-traffic rule, e.g. 1,3,5,7.
        #[arg(long)]
        saturated: Option<String>,
        #[arg(long, default_value = "0.01:0.99:0.01")]
        rho_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulation estimates next to the exact metrics.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rates: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        /// Defaults to 10% of the steps.
        #[arg(long)]
        warmup: Option<u64>,
        #[arg(long, default_value_t = 1)]
        replications: usize,
        /// Write the estimates as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        instability_error: bool,
    },
    /// Degree-proportional or min-max-load arrival rates.
    Optimize {
        #[command(flatten)]
        input: Input,
        /// degree or minmax.
        #[arg(long, default_value = "minmax")]
        mode: String,
        #[arg(long)]
        max_cardinality: Option<usize>,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Write the rates here, one per line.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    graph: PathBuf,
}

impl Input {
    fn load(&self) -> Result<CompatibilityGraph> {
        read_graph(&self.graph)
    }
}

fn create(path: &PathBuf) -> Result<File> {
    File::create(path).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<i32> {
    let cap = cli::state_cap()?;
    match cli.command {
        Command::Analyze {
            input,
            rates,
            out,
            instability_error,
        } => {
            let graph = input.load()?;
            let rates = read_rates(rates, Some(graph.n_classes()))?;
            let report = cli::run_analyze(&graph, &rates, cap)?;
            print!("{report}");
            if let Some(path) = out {
                serde_json::to_writer_pretty(create(&path)?, &report.summary())
                    .map_err(|e| Error::Domain(e.to_string()))?;
            }
            if instability_error && !report.stability.stable {
                return Ok(cli::EXIT_UNSTABLE);
            }
        }
        Command::Sweep {
            input,
            rule,
            rates,
            saturated,
            rho_grid,
            out,
        } => {
            let graph = input.load()?;
            let n = graph.n_classes();
            let rule = match (rule.as_deref(), rates) {
                (None | Some("explicit"), Some(path)) => {
                    RateRule::Explicit(read_rates(path, Some(n))?)
                }
                (Some("explicit"), None) => {
                    return Err(Error::Parse("the explicit rule needs --rates".into()))
                }
                (Some("cycle"), None) => RateRule::Cycle,
                (Some("racket"), None) => RateRule::Racket,
                (Some("heavy-traffic"), None) => {
                    let list = saturated.ok_or_else(|| {
                        Error::Parse("the heavy-traffic rule needs --saturated".into())
                    })?;
                    RateRule::HeavyTraffic {
                        saturated: cli::parse_class_list(&list, n)?,
                    }
                }
                (Some(other), None) => return Err(Error::Parse(format!("unknown rule {other:?}"))),
                (Some(_), Some(_)) => {
                    return Err(Error::Parse(
                        "--rates only goes with the explicit rule".into(),
                    ))
                }
                (None, None) => return Err(Error::Parse("give --rule or --rates".into())),
            };
            let spec = SweepSpec::new(graph, rule, cli::parse_rho_grid(&rho_grid)?)?;
            let rows = cli::run_sweep(&spec, cap)?;
            match out {
                Some(path) => cli::write_sweep_csv(create(&path)?, n, &rows)?,
                None => cli::write_sweep_csv(io::stdout().lock(), n, &rows)?,
            }
        }
        Command::Simulate {
            input,
            rates,
            seed,
            steps,
            warmup,
            replications,
            out,
            instability_error,
        } => {
            let graph = input.load()?;
            let rates = read_rates(rates, Some(graph.n_classes()))?;
            let config = SimulationConfig {
                warmup,
                ..SimulationConfig::new(steps, seed)
            };
            let report = cli::run_simulate(&graph, &rates, &config, replications, cap)?;
            print!("{report}");
            if let Some(path) = out {
                cli::write_simulation_csv(create(&path)?, &report)?;
            }
            if instability_error && !report.estimates.stable {
                return Ok(cli::EXIT_UNSTABLE);
            }
        }
        Command::Optimize {
            input,
            mode,
            max_cardinality,
            iterations,
            tolerance,
            out,
        } => {
            let graph = input.load()?;
            let mode: OptimizeMode = mode.parse()?;
            let options = OptimizerOptions {
                tolerance,
                max_iterations: iterations,
                max_cardinality,
                set_cap: cap,
            };
            let report = cli::run_optimize(&graph, mode, &options)?;
            print!("{report}");
            if let Some(path) = out {
                create(&path)?
                    .write_all(format_rates(report.rates()).as_bytes())
                    .map_err(|e| Error::Domain(e.to_string()))?;
            }
        }
    }
    Ok(cli::EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
