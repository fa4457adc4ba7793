use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coherent_cli::commands;
use coherent_cli::config::Experiment;
use coherent_cli::CliError;
use coherent_core::tracking::TrackMethod;

#[derive(Parser)]
#[command(name = "coherent", version, about = "Transfer-operator coherent structure pipeline")]
struct Cli {
    #[arg(long, global = true, default_value = "experiment.toml")]
    config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Values,
    Vectors,
}

impl From<Method> for TrackMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Values => TrackMethod::ByValues,
            Method::Vectors => TrackMethod::ByVectors,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build one Ulam matrix per step.
    Build {
        /// Rebuild files that already exist.
        #[arg(long)]
        force: bool,
    },
    /// Truncated SVD of every rolling window.
    Svd,
    /// Track singular value paths across windows.
    Track {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Equivariance mismatch along tracked paths.
    Equivariance {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Frames of one left singular vector evolved through its window.
    Animate {
        /// Window start time.
        #[arg(long)]
        window: f64,
        /// 1-based mode.
        #[arg(long)]
        mode: usize,
    },
    /// Coherence decay of one mode over its window.
    CoherenceLog {
        #[arg(long)]
        window: f64,
        #[arg(long)]
        mode: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let exp = Experiment::load(&cli.config)?;
    let method = |m: Option<Method>| m.map(TrackMethod::from).unwrap_or(exp.method);
    match cli.command {
        Command::Build { force } => {
            let r = commands::build(&exp, force)?;
            println!("{} matrices written, {} up to date", r.written.len(), r.skipped.len());
        }
        Command::Svd => println!("{} windows", commands::svd(&exp)?),
        Command::Track { method: m } => println!("{}", commands::track(&exp, method(m))?.display()),
        Command::Equivariance { method: m } => println!("{}", commands::equivariance(&exp, method(m))?.display()),
        Command::Animate { window, mode } => println!("{} frames", commands::animate(&exp, window, mode)?),
        Command::CoherenceLog { window, mode } => {
            println!("{}", commands::coherence_log(&exp, window, mode)?.display())
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
