//! `diffinv`: curvature, scalar differential invariants, invariant counts
//! and symmetry estimates for metrics given in coordinates.

mod commands;
mod report;

use std::io::IsTerminal;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliError, HomogeneityArgs, InvariantArgs, Outcome};
use report::{CommandEcho, Report};

#[derive(Parser, Debug)]
#[command(author, version, about)]
struct Cli {
    /// Output format; text on a terminal, json otherwise.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metric, Christoffel symbols, Riemann, Ricci, scalar curvature, Ricci
    /// operator and Weyl tensor at a point.
    Curvature {
        #[arg(long)]
        metric: String,
        /// Point as `x=1.0,y=0.5`.
        #[arg(long)]
        point: String,
        /// Number of covariant derivatives of the Riemann tensor to include.
        #[arg(long, default_value_t = 0)]
        order: usize,
    },
    /// Labelled scalar invariants up to a differential order.
    Invariants {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 2)]
        max_order: usize,
        /// Largest power of the Ricci operator in higher invariants.
        #[arg(long, default_value_t = 1)]
        a_power_range: usize,
        /// Emit every Weyl trace instead of an independent subset.
        #[arg(long)]
        all_weyl_traces: bool,
        /// Also emit the coordinate gradient of each invariant.
        #[arg(long)]
        gradients: bool,
    },
    /// Functional rank of the invariants over a box and the implied
    /// dimension of symmetry orbits.
    Homogeneity {
        #[arg(long)]
        metric: String,
        /// Sampling box as `x=0.5:2.5,y=-1:1`.
        #[arg(long = "box")]
        domain: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        abs_floor: f64,
        #[arg(long, default_value_t = 1)]
        a_power_range: usize,
        /// Also test local homogeneity with invariants built from up to
        /// this many covariant derivatives of the curvature.
        #[arg(long)]
        order_bound: Option<usize>,
        /// Largest scaled gradient norm accepted as constant.
        #[arg(long, default_value_t = 1e-6)]
        homogeneous_tol: f64,
    },
    /// Numbers of independent invariants by order.
    Count {
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 10)]
        max_k: u32,
    },
    /// The Poincaré function of the invariant algebra and its expansion.
    Poincare {
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 12)]
        expand: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curvature { .. } => "curvature",
            Command::Invariants { .. } => "invariants",
            Command::Homogeneity { .. } => "homogeneity",
            Command::Count { .. } => "count",
            Command::Poincare { .. } => "poincare",
        }
    }

    fn run(&self) -> Result<Outcome, CliError> {
        match self {
            Command::Curvature { metric, point, order } => commands::curvature(metric, point, *order),
            Command::Invariants { metric, point, max_order, a_power_range, all_weyl_traces, gradients } => {
                commands::invariants(&InvariantArgs {
                    metric,
                    point,
                    max_order: *max_order,
                    a_power_range: *a_power_range,
                    all_weyl_traces: *all_weyl_traces,
                    gradients: *gradients,
                })
            }
            Command::Homogeneity {
                metric,
                domain,
                samples,
                seed,
                max_order,
                rel_tol,
                abs_floor,
                a_power_range,
                order_bound,
                homogeneous_tol,
            } => commands::homogeneity_cmd(&HomogeneityArgs {
                metric,
                domain,
                samples: *samples,
                seed: *seed,
                max_order: *max_order,
                rel_tol: *rel_tol,
                abs_floor: *abs_floor,
                a_power_range: *a_power_range,
                order_bound: *order_bound,
                homogeneous_tol: *homogeneous_tol,
            }),
            Command::Count { dim, max_k } => commands::count(*dim, *max_k),
            Command::Poincare { dim, expand } => commands::poincare_cmd(*dim, *expand),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format.unwrap_or(if std::io::stdout().is_terminal() { Format::Text } else { Format::Json });
    let start = Instant::now();
    let outcome = match panic::catch_unwind(|| cli.command.run()) {
        Ok(result) => result,
        Err(_) => Err(CliError::Internal("computation aborted".to_string())),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("diffinv {}: {e}", cli.command.name());
            return ExitCode::from(e.exit_code());
        }
    };
    let report = Report {
        command: CommandEcho { name: cli.command.name().to_string(), argv: std::env::args().skip(1).collect() },
        metric: outcome.metric,
        parameters: outcome.parameters,
        results: outcome.results,
        warnings: outcome.warnings,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match format {
        Format::Json => match report::to_json(&report, true) {
            Ok(text) => println!("{text}"),
            Err(e) => {
                eprintln!("diffinv: cannot encode report: {e}");
                return ExitCode::from(4);
            }
        },
        Format::Text => print!("{}", report::to_text(&report)),
    }
    ExitCode::SUCCESS
}
