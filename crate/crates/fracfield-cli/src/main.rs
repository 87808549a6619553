//! Command-line front end for the fracfield library.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use commands::{SampleParams, VarianceParams};
use config::{StudyOverrides, DEFAULT_KAPPA};

#[derive(Parser)]
#[command(
    name = "fracfield",
    version,
    about = "Gaussian random fields driven by fractional elliptic equations"
)]
struct Cli {
    /// Cap the worker thread count (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files; falls back to FRACFIELD_OUTPUT_DIR,
    /// then the working directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the weak convergence study; writes rows.csv and rates.csv.
    Study(StudyArgs),
    /// Draw field realizations; writes samples.csv.
    Sample(SampleArgs),
    /// Tabulate discrete against reference pointwise variances; writes
    /// variance.csv.
    Variance(VarianceArgs),
    /// Print quadrature node counts over a mesh/exponent grid.
    SchemeTable(SchemeTableArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// TOML config file; individual flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Comma-separated fractional exponents.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Comma-separated interior node counts per axis.
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    /// Quadrature step rule: experiment or weak-theory.
    #[arg(long)]
    calibration: Option<String>,
    /// Series truncation of the reference model.
    #[arg(long)]
    n_ok: Option<usize>,
    /// Evaluation points per axis for the variance grid.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Comma-separated functional specs, e.g. abs:2 or probit:0.5:20.
    #[arg(long, value_delimiter = ',')]
    functionals: Option<Vec<String>>,
    /// Byte budget for dense intermediates.
    #[arg(long)]
    memory_cap: Option<usize>,
    /// Print the planned cells and write nothing.
    #[arg(long)]
    dry_run: bool,
    /// Also write one SVG convergence plot per functional.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct SampleArgs {
    /// TOML config file; individual flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Interior nodes per axis.
    #[arg(long)]
    mesh: Option<usize>,
    /// Quadrature step; defaults to the experiment calibration.
    #[arg(long)]
    step: Option<f64>,
    /// Base seed; realization i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of realizations.
    #[arg(long)]
    count: Option<usize>,
    /// Apply the factorized operator per draw instead of assembling the
    /// dense inverse once.
    #[arg(long)]
    operator: bool,
    /// Byte budget for dense intermediates.
    #[arg(long)]
    memory_cap: Option<usize>,
}

#[derive(Args)]
struct VarianceArgs {
    /// TOML config file; individual flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Fractional exponent; 1 selects the exact banded solve.
    #[arg(long)]
    beta: Option<f64>,
    /// Interior nodes per axis.
    #[arg(long)]
    mesh: Option<usize>,
    /// Series truncation of the reference model.
    #[arg(long)]
    n_ok: Option<usize>,
    /// Evaluation points per axis.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Quadrature step; defaults to the experiment calibration.
    #[arg(long)]
    step: Option<f64>,
    /// Byte budget for dense intermediates.
    #[arg(long)]
    memory_cap: Option<usize>,
}

#[derive(Args)]
struct SchemeTableArgs {
    #[arg(long)]
    dimension: Option<usize>,
    /// Comma-separated fractional exponents.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Comma-separated interior node counts per axis.
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    /// Also print the step and the node index range per cell.
    #[arg(long)]
    detail: bool,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let out_dir = commands::resolve_output_dir(cli.output);
    match cli.command {
        Command::Study(args) => {
            let file = config::load(args.config.as_deref())?;
            let flags = StudyOverrides {
                dimension: args.dimension,
                kappa: args.kappa,
                betas: args.betas,
                meshes: args.meshes,
                calibration: args.calibration,
                n_ok: args.n_ok,
                grid_points: args.grid_points,
                functionals: args.functionals,
                memory_cap: args.memory_cap,
            };
            let study = config::build_study_config(&file, &flags)?;
            commands::cmd_study(&study, &out_dir, args.plot, args.dry_run)
        }
        Command::Sample(args) => {
            let file = config::load(args.config.as_deref())?;
            let params = SampleParams {
                dimension: args.dimension.or(file.dimension).unwrap_or(1),
                kappa: args.kappa.or(file.kappa).unwrap_or(DEFAULT_KAPPA),
                beta: args.beta.or(file.beta).unwrap_or(0.75),
                interior: args.mesh.or(file.mesh).unwrap_or(63),
                step: args.step.or(file.step),
                seed: args.seed.or(file.seed).unwrap_or(0),
                count: args.count.or(file.count).unwrap_or(1),
                operator_mode: args.operator,
                memory_cap: args
                    .memory_cap
                    .or(file.memory_cap)
                    .unwrap_or(fracfield::quadrature::DEFAULT_MEMORY_CAP),
            };
            commands::cmd_sample(&params, &out_dir)
        }
        Command::Variance(args) => {
            let file = config::load(args.config.as_deref())?;
            let params = VarianceParams {
                dimension: args.dimension.or(file.dimension).unwrap_or(1),
                kappa: args.kappa.or(file.kappa).unwrap_or(DEFAULT_KAPPA),
                beta: args.beta.or(file.beta).unwrap_or(0.75),
                interior: args.mesh.or(file.mesh).unwrap_or(63),
                n_ok: args.n_ok.or(file.n_ok).unwrap_or(1 + (1 << 14)),
                grid_points: args.grid_points.or(file.grid_points).unwrap_or(257),
                step: args.step.or(file.step),
                memory_cap: args
                    .memory_cap
                    .or(file.memory_cap)
                    .unwrap_or(fracfield::quadrature::DEFAULT_MEMORY_CAP),
            };
            commands::cmd_variance(&params, &out_dir)
        }
        Command::SchemeTable(args) => {
            let dimension = args.dimension.unwrap_or(1);
            let betas = args
                .betas
                .unwrap_or_else(|| config::DEFAULT_BETAS.to_vec());
            let meshes = args.meshes.unwrap_or_else(|| match dimension {
                2 => vec![15, 31, 63, 127],
                _ => vec![511, 1023, 2047, 4095],
            });
            commands::cmd_scheme_table(dimension, &betas, &meshes, args.detail)
        }
    }
}
