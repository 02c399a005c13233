//! `digitbins` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails,
//! 2 on usage or configuration errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "digitbins",
    version,
    about = "Collision counts of digit-bin partitions"
)]
struct Cli {
    /// Output format; defaults to table on a terminal and csv otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collision count C(g) for a multiplier g.
    Count(CountArgs),
    /// List the deranging multipliers and verify there are no others.
    Gate(GateArgs),
    /// Collision deviation S_l(p) = C(b^l mod p) - floor((p-1)/b).
    Deviation(DeviationArgs),
    /// S_l(a) for every unit a mod b^(l+1).
    Classes(ClassesArgs),
    /// Wrapping-set sizes for every good slice.
    Halfgroup(SystemArgs),
    /// Sweep primes and bases, running the selected checks.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Brute,
    Linear,
    Both,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(short)]
    p: u64,
    #[arg(short)]
    b: u64,
    #[arg(short)]
    g: u64,
    #[arg(long, value_enum, default_value = "linear")]
    method: CountMethod,
}

#[derive(Debug, Args)]
struct GateArgs {
    #[arg(short)]
    p: u64,
    #[arg(short)]
    b: u64,
    /// Sweep every unit regardless of the size of p.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DeviationMethod {
    Direct,
    Formula,
    Both,
}

#[derive(Debug, Args)]
struct DeviationArgs {
    #[arg(short)]
    p: u64,
    #[arg(short)]
    b: u64,
    #[arg(short = 'l', long = "lag")]
    lag: u32,
    #[arg(long, value_enum, default_value = "direct")]
    method: DeviationMethod,
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[arg(short)]
    b: u64,
    #[arg(short = 'l', long = "lag")]
    lag: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassCheck {
    Reflection,
    Mean,
    None,
}

#[derive(Debug, Args)]
struct ClassesArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "none")]
    check: Vec<ClassCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReferenceTable {
    #[value(name = "1")]
    GateWidth,
    #[value(name = "2")]
    Determination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    Gate,
    Linearization,
    Determination,
    Reflection,
    Halfgroup,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Reproduce one of the two reference tables with fixed parameters.
    #[arg(long, value_enum, conflicts_with_all = ["bases", "lags", "pmin", "pmax", "checks"])]
    paper_table: Option<ReferenceTable>,
    #[arg(
        short = 'b',
        long = "bases",
        value_delimiter = ',',
        default_value = "10"
    )]
    bases: Vec<u64>,
    #[arg(short = 'l', long = "lags", value_delimiter = ',', default_value = "1")]
    lags: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    pmin: u64,
    #[arg(long, default_value_t = 1000)]
    pmax: u64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "gate,linearization,determination,reflection,halfgroup"
    )]
    checks: Vec<CheckArg>,
    #[arg(long, default_value_t = digitbins::harness::SCAN_EXHAUSTIVE_THRESHOLD)]
    exhaustive_threshold: u64,
    /// Outside multipliers sampled per prime above the exhaustive threshold.
    #[arg(long, default_value_t = 64)]
    gate_samples: usize,
    /// Multipliers per (p, b) compared between brute and linear counts.
    #[arg(long, default_value_t = 4)]
    linearization_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(short = 'j', long, default_value_t = 0)]
    parallelism: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
