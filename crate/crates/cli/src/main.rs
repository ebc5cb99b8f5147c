//! flowgen: reproducible optical-flow dataset batches from the command line.
//!
//! Subcommands that resolve a generation config echo its canonical text and
//! hash to standard error before any work begins; the others echo their
//! effective parameters. Failures print one machine-parsable line
//! `flowgen: error: <message>` on standard error and exit nonzero. A broken
//! consumer pipe in streaming mode is a normal shutdown (exit 0).

mod gen;
mod report;
mod resolve;
mod tools;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

// ---------------------------------------------------------------------------
// Arguments
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "flowgen", version, about = "Two-frame optical flow datasets with exact ground truth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate samples into a dataset directory, or stream them to stdout.
    Gen(GenArgs),
    /// Augment an existing dataset, relabeling flow analytically.
    Augment(ToolArgs),
    /// Push an existing dataset through a camera degradation profile.
    Degrade(ToolArgs),
    /// Displacement-magnitude histogram of a dataset, as CSV on stdout.
    Stats(StatsArgs),
    /// Mean endpoint error of an estimate directory against ground truth.
    Eval(EvalArgs),
    /// List the shipped preset configurations.
    Presets,
}

/// How a run's config is assembled: preset or file, then `--set` overrides,
/// then the seed override. Flags always win over the file.
#[derive(Args)]
struct ConfigArgs {
    /// Start from a named preset (see `flowgen presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Start from a config file in the canonical text format.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set width=768`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Override the master seed (applied last).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output dataset directory (omit with --stream).
    #[arg(long, required_unless_present = "stream")]
    out: Option<PathBuf>,
    /// Number of samples, or `infinite` to stream without end.
    #[arg(long, conflicts_with = "range")]
    count: Option<CountArg>,
    /// Half-open index range `LO..HI`.
    #[arg(long)]
    range: Option<RangeArg>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Regenerate samples whose files already exist, and replace a
    /// mismatched manifest.
    #[arg(long)]
    overwrite: bool,
    /// Write framed samples to stdout instead of files.
    #[arg(long)]
    stream: bool,
    /// Directory of photo textures (required by `texture.family = photo`).
    #[arg(long, value_name = "DIR")]
    textures: Option<PathBuf>,
    /// Record this timestamp string in the manifest. Off by default so
    /// repeated runs stay byte-identical.
    #[arg(long, value_name = "STRING")]
    timestamp: Option<String>,
}

#[derive(Args)]
struct ToolArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Input dataset directory.
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// Output dataset directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset directory holding `*_flow.flo` files.
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// Number of log-spaced magnitude bins.
    #[arg(long, default_value_t = 40)]
    bins: u32,
    /// Lower edge of the first bin (magnitudes below it are underflow).
    #[arg(long, default_value_t = 0.1)]
    min: f64,
    /// Upper edge of the last bin (larger magnitudes clamp into it).
    #[arg(long, default_value_t = 300.0)]
    max: f64,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of estimated `*_flow.flo` files.
    #[arg(long, value_name = "DIR")]
    est: PathBuf,
    /// Directory of ground-truth `*_flow.flo` files.
    #[arg(long, value_name = "DIR")]
    gt: PathBuf,
    /// Magnitude edges of the partial breakdown, e.g. `0,10,40,160`
    /// (the last range is open-ended).
    #[arg(long, value_name = "E0,E1,...")]
    ranges: Option<String>,
    /// Also write the report as CSV to this file.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Flag value parsers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum CountArg {
    Finite(u64),
    Infinite,
}

impl FromStr for CountArg {
    type Err = String;
    fn from_str(s: &str) -> Result<CountArg, String> {
        if s.eq_ignore_ascii_case("infinite") || s.eq_ignore_ascii_case("inf") {
            return Ok(CountArg::Infinite);
        }
        s.parse::<u64>()
            .map(CountArg::Finite)
            .map_err(|_| format!("expected a sample count or `infinite`, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy)]
struct RangeArg {
    lo: u64,
    hi: u64,
}

impl FromStr for RangeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<RangeArg, String> {
        let bad = || format!("expected `LO..HI`, got `{s}`");
        let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
        let lo = lo.parse::<u64>().map_err(|_| bad())?;
        let hi = hi.parse::<u64>().map_err(|_| bad())?;
        if lo >= hi {
            return Err(format!("empty range `{s}`"));
        }
        Ok(RangeArg { lo, hi })
    }
}

// ---------------------------------------------------------------------------
// Entry
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => gen::run(args),
        Command::Augment(args) => tools::augment(args),
        Command::Degrade(args) => tools::degrade(args),
        Command::Stats(args) => report::stats(args),
        Command::Eval(args) => report::eval(args),
        Command::Presets => report::presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A consumer closing the pipe ends a stream cleanly.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let line: Vec<String> = e.chain().map(ToString::to_string).collect();
            eprintln!("flowgen: error: {}", line.join(": ").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            return io.kind() == std::io::ErrorKind::BrokenPipe;
        }
        if let Some(flowgen_core::Error::Io { source, .. }) =
            cause.downcast_ref::<flowgen_core::Error>()
        {
            return source.kind() == std::io::ErrorKind::BrokenPipe;
        }
        false
    })
}
