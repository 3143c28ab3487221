//! Command-line front end for `kmodel-core`.
//!
//! Every subcommand writes JSON (or CSV with `--format csv`) to stdout or to
//! `--out`. Failures print an error object `{code, message, context}` to
//! stderr and exit with 2 (usage), 3 (numerical) or 4 (solver). `reproduce`
//! exits with 1 when a row misses its tolerance.

pub mod commands;
mod error;
pub mod manifest;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kmodel_core::sim::SimConfig;
use kmodel_core::units::default_constants;

pub use commands::{execute, OutputFormat, Output, Request, DEFAULT_SEED, DEFAULT_SPHERE_SAMPLES};
pub use error::{CliError, EXIT_CHECK_FAILED, EXIT_NUMERICAL, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};
pub use manifest::{ManifestCommand, RunManifest};

use commands::{CellRequest, SimulateRequest, UncertaintyInput};

#[derive(Debug, Parser)]
#[command(name = "kmodel", version, about = "Károlyházy model calculator (CGS units)")]
pub struct Cli {
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Physical constants table
    Constants,
    /// Structural uncertainty of a time interval or of clock synchronization
    #[command(allow_negative_numbers = true)]
    Uncertainty(UncertaintyArgs),
    /// Relative-phase spread between two configurations
    Spread {
        /// JSON file with masses_g, positions_a_cm, positions_b_cm
        #[arg(long)]
        config: PathBuf,
        /// Also evaluate the k-space oracle and report the ratio
        #[arg(long)]
        oracle: bool,
    },
    /// Coherence cell lengths
    #[command(subcommand)]
    Cell(CellCommand),
    /// Expansion-localization simulation of a body's centre of mass
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Recompute the published headline numbers
    Reproduce,
    /// Execute a JSON run manifest
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct UncertaintyArgs {
    /// Interval length [s]
    #[arg(long)]
    time: Option<f64>,
    /// Separation of the two clocks [cm]
    #[arg(long)]
    distance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum CellCommand {
    /// Point particle
    #[command(allow_negative_numbers = true)]
    Point {
        #[arg(long)]
        mass_g: f64,
    },
    /// Homogeneous sphere, solved numerically with closed-form fallback
    #[command(allow_negative_numbers = true)]
    Sphere {
        #[arg(long)]
        mass_g: f64,
        #[arg(long)]
        radius_cm: f64,
        #[arg(long, default_value_t = DEFAULT_SPHERE_SAMPLES)]
        samples: u64,
        #[arg(long, env = "KMODEL_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Transition radius and mass for a density
    #[command(allow_negative_numbers = true)]
    Transition {
        /// [g/cm³]
        #[arg(long)]
        density: f64,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    mass_g: f64,
    #[arg(long)]
    cell_cm: f64,
    #[arg(long)]
    sigma0_cm: f64,
    #[arg(long)]
    duration_s: f64,
    #[arg(long)]
    dt_s: f64,
    #[arg(long, env = "KMODEL_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Independent runs with derived seeds
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// 1 or 3
    #[arg(long, default_value_t = 3)]
    dims: usize,
}

fn env_seed() -> Result<u64, CliError> {
    match std::env::var("KMODEL_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("KMODEL_SEED must be a non-negative integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Runs a manifest. Returns the exit status with the output or error text.
pub fn dispatch(manifest: &RunManifest, base_dir: &Path, fallback_format: OutputFormat) -> Result<Output, CliError> {
    let request = manifest.to_request(env_seed()?, base_dir)?;
    let format = manifest.output_format.unwrap_or(fallback_format);
    execute(&request, format, &default_constants())
}

fn request_from(command: Command) -> Result<Request, CliError> {
    Ok(match command {
        Command::Constants => Request::Constants,
        Command::Reproduce => Request::Reproduce,
        Command::Uncertainty(u) => match (u.time, u.distance) {
            (Some(t), _) => Request::Uncertainty(UncertaintyInput::Time(t)),
            (None, Some(d)) => Request::Uncertainty(UncertaintyInput::Distance(d)),
            (None, None) => unreachable!("clap requires one of --time or --distance"),
        },
        Command::Spread { config, oracle } => Request::Spread { config, oracle },
        Command::Cell(CellCommand::Point { mass_g }) => Request::Cell(CellRequest::Point { mass_g }),
        Command::Cell(CellCommand::Sphere {
            mass_g,
            radius_cm,
            samples,
            seed,
        }) => Request::Cell(CellRequest::Sphere {
            mass_g,
            radius_cm,
            samples,
            seed,
        }),
        Command::Cell(CellCommand::Transition { density }) => Request::Transition { density_g_cm3: density },
        Command::Simulate(s) => Request::Simulate(SimulateRequest {
            config: SimConfig {
                mass: s.mass_g,
                cell_length: s.cell_cm,
                initial_sigma: s.sigma0_cm,
                duration: s.duration_s,
                time_step: s.dt_s,
                seed: s.seed,
                dimensions: s.dims,
            },
            runs: s.runs,
        }),
        Command::Run { .. } => unreachable!("manifests are dispatched separately"),
    })
}

fn execute_cli(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Run { manifest } => {
            let m = RunManifest::load(&manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            dispatch(&m, base, cli.format)
        }
        command => execute(&request_from(command)?, cli.format, &default_constants()),
    }
}

/// Entry point used by the binary: parses `args`, writes output and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let err = CliError::usage(e.kind().to_string())
                .with_context(serde_json::json!({ "detail": e.to_string().trim_end() }));
            eprintln!("{}", err.to_json());
            return EXIT_USAGE;
        }
    };
    let out_path = cli.out.clone();
    match execute_cli(cli) {
        Ok(output) => {
            let written = match &out_path {
                Some(path) => std::fs::write(path, &output.body).map_err(|e| CliError::io(path, e)),
                None => std::io::stdout()
                    .write_all(output.body.as_bytes())
                    .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}"))),
            };
            match written {
                Ok(()) => output.exit_code,
                Err(err) => {
                    eprintln!("{}", err.to_json());
                    err.exit_code
                }
            }
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code
        }
    }
}
