//! Command-line front end: trade-off curves, operating points, oracle
//! verification, the file codec, reference cost tables and lifecycle
//! simulation.
//!
//! Exit codes: 0 success, 1 usage or schema error, 2 verification
//! counterexample, 3 codec or data error.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand};
use config::Config;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bsregen",
    version,
    about = "Base-station-assisted cooperative regenerating codes"
)]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled sweeps and simulations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of storage values on the trade-off curve.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Run the larger verification sweeps.
    #[arg(long, global = true)]
    pub exhaustive: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum repair cost against storage, as CSV.
    Tradeoff {
        /// Also emit the curve without base stations at the same storage values.
        #[arg(long)]
        baseline: bool,
    },
    /// The two closed-form operating points and their layer counts, as JSON.
    Points,
    /// Closed-form bound against enumeration and flow-graph min-cuts.
    Verify,
    /// Encode, repair and collect files with the exact construction.
    Codec {
        #[command(subcommand)]
        op: CodecOp,
    },
    /// Per-newcomer cost of the reference repair schemes.
    Table1,
    /// Lazy-repair lifecycle trace, as JSON lines.
    Simulate,
}

#[derive(Debug, Subcommand)]
pub enum CodecOp {
    /// Split a file into node and base-station stores.
    Encode {
        input: PathBuf,
        #[arg(long)]
        dir: PathBuf,
    },
    /// Regenerate failed nodes from the stores left in a directory.
    Repair {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated failed node ids (1-based).
        #[arg(long, value_delimiter = ',', required = true)]
        failed: Vec<usize>,
        /// Fetch base-station chunks before the cooperative exchange.
        #[arg(long)]
        bs_first: bool,
    },
    /// Rebuild the file from the given nodes; written to --out.
    Collect {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated node ids (1-based).
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
    },
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                CliError::Data(format!("{}: {e}", path.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(CliError::Usage)?,
        None => Config::default(),
    };
    if let Command::Codec {
        op: CodecOp::Collect { dir, nodes },
    } = &cli.command
    {
        let out = cli
            .out
            .as_ref()
            .ok_or_else(|| CliError::Usage("codec collect needs --out".into()))?;
        return commands::codec_collect(dir, nodes, out);
    }
    let mut out = open_out(&cli.out)?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    match &cli.command {
        Command::Tradeoff { baseline } => {
            commands::tradeoff(&config, cli.grid, *baseline, &mut out)?
        }
        Command::Points => commands::points(&config, &mut out)?,
        Command::Verify => {
            let exhaustive = cli.exhaustive || config.verify.exhaustive;
            commands::verify(&config, seed, exhaustive, bsregen::bounds::psi, &mut out)?
        }
        Command::Codec { op } => match op {
            CodecOp::Encode { input, dir } => {
                commands::codec_encode(&config, input, dir, &mut out)?
            }
            CodecOp::Repair {
                dir,
                failed,
                bs_first,
            } => commands::codec_repair(&config, dir, failed, *bs_first, &mut out)?,
            CodecOp::Collect { .. } => unreachable!("handled above"),
        },
        Command::Table1 => commands::table1(&config, &mut out)?,
        Command::Simulate => commands::simulate(&config, seed, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
