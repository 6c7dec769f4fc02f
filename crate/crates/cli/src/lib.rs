//! Experiment runner for the polytope division method: JSON configs in,
//! CSV traces, JSON summaries and SVG snapshots out.
//!
//! Exit codes: 0 success, 1 failed check or non-converged run, 2 invalid
//! configuration or usage.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_check_division, cmd_compare, cmd_run, cmd_snapshot_svg, RunOptions};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "pdm", version, about = "Polytope division and greedy sampling experiments")]
pub struct Cli {
    /// Worker threads (default: PDM_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: PDM_OUT_DIR, then the config, then ./pdm-out).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Verification sample size.
    #[arg(long)]
    pub verify: Option<usize>,
    /// Write wall_ms as 0 so repeated runs give identical bytes.
    #[arg(long)]
    pub no_timing: bool,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            config: self.config.clone(),
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            verify: self.verify,
            timing: !self.no_timing,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configured method.
    Run(RunArgs),
    /// Run PDM and GSM over a dimension sweep.
    Compare(RunArgs),
    /// Check a saved division for coverage and disjointness.
    CheckDivision {
        division: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compare every cell's facets with the brute-force oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Render a 2-D division as SVG.
    SnapshotSvg { division: PathBuf, out: PathBuf },
}

fn threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("PDM_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("PDM_THREADS: not a count: {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let pool = match threads(cli.threads)? {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Run(a) => cmd_run(&a.options()),
        Command::Compare(a) => cmd_compare(&a.options()).map(|_| ()),
        Command::CheckDivision {
            division,
            samples,
            seed,
            oracle,
        } => cmd_check_division(division, *samples, *seed, *oracle),
        Command::SnapshotSvg { division, out } => cmd_snapshot_svg(division, out),
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
