//! Command-line front end for the wavelab experiments.
//!
//! [`run`] parses arguments, merges them over an optional TOML config,
//! runs one pipeline and returns the process exit code: `0` on success,
//! `2` for invalid input, `3` when the numerics fail.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavelab::harness::Exponent;
use wavelab::Error;

mod commands;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wavelab", version, about = "Experiments on bilinear wave multipliers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file with per-command sections; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for records.jsonl and summary.csv (default: $WAVELAB_OUT_DIR or ./wavelab-out).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomised partition, transform and product identities.
    PartitionCheck {
        #[arg(long)]
        instances: Option<usize>,
    },
    /// L^p norms of the radial wave kernel across scales.
    KernelScan {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<Exponent>>,
        #[arg(long)]
        jmin: Option<i32>,
        #[arg(long)]
        jmax: Option<i32>,
    },
    /// L¹ growth of the modulated dyadic multiplier kernels.
    L1Probe {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        #[arg(long)]
        jmin: Option<i32>,
        #[arg(long)]
        jmax: Option<i32>,
    },
    /// Partition, support and L¹ bounds of the angular frame.
    AngularCheck {
        #[arg(long)]
        jmin: Option<i32>,
        #[arg(long)]
        jmax: Option<i32>,
    },
    /// Separable Fourier-series expansion of a symbol, block by block.
    ExpandSymbol {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<f64>,
        #[arg(long)]
        jmax: Option<i32>,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Lower-bound experiments (cases 1, 2 and 3).
    Sharpness {
        #[arg(long)]
        case: Option<u8>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<Exponent>>,
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<Exponent>>,
        #[arg(long)]
        jmin: Option<i32>,
        #[arg(long)]
        jmax: Option<i32>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Ratio sweeps of the σ_j family against the known critical orders.
    UpperBound {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<Exponent>>,
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<Exponent>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Option<Vec<f64>>,
        #[arg(long)]
        jmin: Option<i32>,
        #[arg(long)]
        jmax: Option<i32>,
        #[arg(long)]
        random_pairs: Option<usize>,
    },
    /// Re-emit a record store as CSV, JSON lines or plot data.
    Report {
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Record store (default: <out-dir>/records.jsonl).
        #[arg(long)]
        store: Option<PathBuf>,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Highpass,
    Lowpass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Sigma,
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
    Plotdata,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
