//! Command-line surface: density estimation, time-series prediction,
//! bandwidth cross-validation and the Monte Carlo rate study, with
//! machine-readable CSV/JSON outputs.
//!
//! Exit codes: 0 success (warnings are structured report fields, never exit
//! codes), 2 input/data error, 3 configuration error.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "condmode",
    version,
    about = "Conditional-mode estimation and prediction for curve-valued data"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Debug, Default)]
struct GlobalArgs {
    /// TOML configuration file; flags override file values, which override defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker-thread cap (1 guarantees bit-exact sequential execution)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate a conditional density curve for a query curve
    Density(commands::density::DensityArgs),
    /// Predict the next segment characteristic of a single series
    Predict(commands::predict::PredictArgs),
    /// Cross-validate bandwidth candidates by leave-one-out mode prediction
    Cv(commands::cv::CvArgs),
    /// Run the Monte Carlo error-decay study on synthetic mixing data
    Simulate(commands::simulate::SimulateArgs),
}

/// CLI-level error carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Configuration problems: unknown names, missing required options,
    /// invalid parameter values. Exit code 3.
    Config(String),
    /// Library errors, classified into data (2) or configuration (3).
    Lib(condmode::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Lib(e) => match e {
                condmode::Error::Io(_)
                | condmode::Error::CsvData { .. }
                | condmode::Error::FileFormat { .. }
                | condmode::Error::PathTooShort { .. }
                | condmode::Error::InvalidCurve(_)
                | condmode::Error::InvalidSample(_)
                | condmode::Error::GridMismatch
                | condmode::Error::Extrapolation { .. } => 2,
                _ => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<condmode::Error> for CliError {
    fn from(e: condmode::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(condmode::Error::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::from_default_env()
        .filter_level(level)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::load(cli.global.config.as_deref())?;

    let seed = cli.global.seed.or(file.seed).unwrap_or(0);
    let workers = cli.global.workers.or(file.workers);
    let out_dir = cli
        .global
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure worker pool: {e}")))?;
    }
    std::fs::create_dir_all(&out_dir)?;

    match cli.command {
        Command::Density(args) => commands::density::run(args.merged(file.density), &out_dir, seed),
        Command::Predict(args) => commands::predict::run(args.merged(file.predict), &out_dir, seed),
        Command::Cv(args) => commands::cv::run(args.merged(file.cv), &out_dir, seed),
        Command::Simulate(args) => {
            commands::simulate::run(args.merged(file.simulate), &out_dir, seed)
        }
    }
}
