//! `isomlab` — deterministic experiment runner for the metric-geometry
//! laboratory: distances between finite metric spaces, normed-space
//! distance estimates, almost-isometry recovery, finite embeddings,
//! equilateral configurations, and dimension-drop witnesses.
//!
//! Every command emits a single report (JSON or CSV) whose bytes depend
//! only on the arguments and `--seed`, never on thread count or timing.
//! Exit codes: 0 success (including expected-fail rows), 2 usage error,
//! 3 numeric failure or a failed judged row.

mod commands;
mod error;
mod parse;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Ctx;
use crate::error::{usage, CliError, CliResult};
use crate::parse::parse_tolerances;
use crate::report::Report;

#[derive(Parser)]
#[command(
    name = "isomlab",
    version,
    about = "Numerical laboratory for metric and normed-space geometry",
    max_term_width = 100
)]
struct Cli {
    /// Seed for every randomized search in the run
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Node budget for the branch-and-bound distance search
    #[arg(long = "budget-nodes", global = true, default_value_t = isomlab::metric::gh::DEFAULT_NODE_BUDGET)]
    budget_nodes: u64,

    /// Tolerance override, repeatable: --tol name=value
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two finite metric spaces by three agreeing routes
    Gh {
        /// Finite metric space JSON file
        #[arg(long)]
        x: String,
        /// Finite metric space JSON file
        #[arg(long)]
        y: String,
        /// Also solve both spaces rescaled by this factor and check linearity
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Distance table under joint rescaling, judged against exact linearity
    ScalingDemo {
        /// Finite metric space JSON file
        #[arg(long)]
        x: String,
        /// Finite metric space JSON file
        #[arg(long)]
        y: String,
        /// Comma-separated positive rescaling factors
        #[arg(long, default_value = "1,2,4")]
        lambdas: String,
    },
    /// Multiplicative distance estimate between two normed spaces
    Bm {
        /// Norm spec: lp:<p>:<dim>, l1:<dim>, l2:<dim>, linf:<dim>, or a JSON file
        #[arg(long)]
        v: String,
        /// Norm spec (same syntax as --v)
        #[arg(long)]
        w: String,
        /// Search restarts beyond the identity start
        #[arg(long, default_value_t = 8)]
        restarts: u32,
        /// Also compare sampled unit-ball spaces of this many points
        #[arg(long = "kadets-sample", value_name = "POINTS")]
        kadets_sample: Option<usize>,
    },
    /// Recover the linear part of an almost-isometry and check deviation bounds
    Recover {
        /// Map preset: rotation:<dim>, noisy:<dim>:<eps>, sqrt:<eps>, abs:<dim>
        #[arg(long)]
        map: String,
        /// Probe-ball radius for the deviation check (preset default otherwise)
        #[arg(long)]
        radius: Option<f64>,
        /// Probe count for the deviation check
        #[arg(long, default_value_t = 128)]
        probes: usize,
    },
    /// Search for a placement of a finite metric space in a normed space
    Embed {
        /// Finite metric space JSON file
        #[arg(long)]
        space: String,
        /// Target norm spec (same syntax as bm --v)
        #[arg(long)]
        w: String,
        /// Search restarts beyond the deterministic starts
        #[arg(long, default_value_t = 8)]
        restarts: u32,
    },
    /// Search for m points at equal pairwise distance in a normed space
    Simplex {
        /// Ambient norm spec (same syntax as bm --v)
        #[arg(long)]
        w: String,
        /// Number of points requested
        #[arg(long)]
        m: usize,
        /// Common pairwise distance
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        /// Search restarts
        #[arg(long, default_value_t = 40)]
        restarts: u32,
    },
    /// Witness that the coordinate projection collapses an antipodal pair
    Borsuk {
        /// Domain norm spec (same syntax as bm --v)
        #[arg(long)]
        v: String,
        /// Codomain norm spec; must have strictly smaller dimension
        #[arg(long)]
        codomain: String,
        /// Comma-separated sphere radii to witness
        #[arg(long, default_value = "1,10,100")]
        radii: String,
        /// Sphere-net resolution for the witness search
        #[arg(long = "net-eps", default_value_t = 0.05)]
        net_eps: f64,
    },
}

/// Applies `ISOMLAB_THREADS` before any parallel work runs. The thread
/// count changes scheduling only — reports are byte-identical regardless.
fn init_threads() -> CliResult<()> {
    match std::env::var("ISOMLAB_THREADS") {
        Err(_) => Ok(()),
        Ok(text) => {
            let n: usize = text
                .parse()
                .map_err(|_| usage(format!("ISOMLAB_THREADS=`{text}` is not a thread count")))?;
            if n == 0 {
                return Err(usage("ISOMLAB_THREADS must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| usage(format!("thread pool setup failed: {e}")))
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    init_threads()?;
    let ctx = Ctx {
        seed: cli.seed,
        budget_nodes: cli.budget_nodes,
        tolerances: parse_tolerances(&cli.tol)?,
    };
    let report: Report = match &cli.command {
        Command::Gh { x, y, scale } => commands::run_gh(&ctx, x, y, *scale)?,
        Command::ScalingDemo { x, y, lambdas } => commands::run_scaling_demo(&ctx, x, y, lambdas)?,
        Command::Bm {
            v,
            w,
            restarts,
            kadets_sample,
        } => commands::run_bm(&ctx, v, w, *restarts, *kadets_sample)?,
        Command::Recover {
            map,
            radius,
            probes,
        } => commands::run_recover(&ctx, map, *radius, *probes)?,
        Command::Embed { space, w, restarts } => commands::run_embed(&ctx, space, w, *restarts)?,
        Command::Simplex {
            w,
            m,
            side,
            restarts,
        } => commands::run_simplex(&ctx, w, *m, *side, *restarts)?,
        Command::Borsuk {
            v,
            codomain,
            radii,
            net_eps,
        } => commands::run_borsuk(&ctx, v, codomain, radii, *net_eps)?,
    };
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.has_failure())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}
