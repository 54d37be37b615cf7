//! Command-line front end: `price`, `validate`, `converge` and `boundary`
//! on a JSON run configuration.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 numerical error.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use commands::execute;
pub use config::{
    Format, Knob, ModelConfig, ModelType, NumericsConfig, OptionConfig, Oracle, OutputConfig,
    RunConfig, ValidationConfig,
};
pub use report::{Report, FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] crate::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Price,
    Validate,
    Converge,
    Boundary,
}

#[derive(Debug, Parser)]
#[command(
    name = "mellin-levy",
    version,
    about = "Basket option pricing by Mellin inversion"
)]
pub struct Args {
    pub command: Command,
    /// JSON run configuration.
    pub config: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 1 gives reproducible output.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the Monte Carlo seed of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_args(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_args(args: &Args) -> Result<i32, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.validation.seed = seed;
    }
    let format = args.format.unwrap_or(config.output.format);
    let out = args.out.clone().or_else(|| config.output.path.clone());

    let report = match args.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {t} threads: {e}")))?
            .install(|| execute(args.command, &config))?,
        None => execute(args.command, &config)?,
    };

    let text = report.render(format)?;
    match out {
        Some(path) => {
            std::fs::write(&path, &text)
                .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
            if format != Format::Table {
                print!("{}", report.render(Format::Table)?);
            }
        }
        None => print!("{text}"),
    }
    Ok(report.exit_code)
}
