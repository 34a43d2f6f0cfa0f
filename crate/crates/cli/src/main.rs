use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use concatgv::codes::DEFAULT_BUDGET;
use concatgv::report::{render_envelope, Format};

mod cmd;

/// Output directory used when `--out` is absent.
pub const OUT_DIR_ENV: &str = "CONCATGV_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "concatgv",
    version,
    about = "Concatenated binary code experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Seed for every random choice the subcommand makes.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumeration budget (codewords, tuples or samples) [default: 2^24].
    #[arg(long)]
    pub budget: Option<u64>,
    /// Output file; defaults to $CONCATGV_OUT_DIR/<subcommand>.<ext>, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
}

impl Common {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn budget(&self) -> u128 {
        self.budget.map_or(DEFAULT_BUDGET, u128::from)
    }

    pub fn fmt(&self) -> Format {
        self.format.into()
    }

    /// Destination for the main report of `name`, or `None` for stdout.
    pub fn destination(&self, name: &str) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .map(|d| PathBuf::from(d).join(format!("{name}.{}", self.fmt().extension())))
        })
    }

    /// Directory for multi-file outputs.
    pub fn directory(&self, name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."))
                .join(name)
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Describe GF(2^k0): modulus, self-dual basis and trace table.
    Field(cmd::FieldArgs),
    /// Sample a random inner (binary) or outer code.
    SampleCode(cmd::SampleArgs),
    /// Build a concatenated code from two code files.
    Concat(cmd::ConcatArgs),
    /// Minimum distance of a binary or concatenated code.
    Distance(cmd::DistanceArgs),
    /// Niceness of an inner code.
    NiceCheck(cmd::NiceArgs),
    /// Soft-decoding condition of an outer code.
    SoftCheck(cmd::SoftArgs),
    /// Smoothed min-entropy condition of an outer code.
    EntropyCheck(cmd::EntropyArgs),
    /// Moment identity, bad-message bound and tuple counts.
    MomentCheck(cmd::MomentArgs),
    /// GV and Zyablov curves with measured points.
    GvCompare(cmd::GvArgs),
    /// Run a parameter sweep from a JSON config.
    Sweep(cmd::SweepArgs),
}

/// Writes `text` to the destination chosen by `common`, or stdout.
pub fn emit(common: &Common, name: &str, text: &str) -> Result<()> {
    match common.destination(name) {
        Some(path) => {
            concatgv::io::write_file(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Emits `result` wrapped with schema, hash, seed, budget and `params`.
pub fn emit_report(common: &Common, name: &str, params: Value, result: Value) -> Result<()> {
    let env = concatgv::report::envelope(name, common.seed(), common.budget(), params, result);
    emit(common, name, &render_envelope(&env, common.fmt()))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Field(a) => cmd::field(a),
        Command::SampleCode(a) => cmd::sample_code(a),
        Command::Concat(a) => cmd::concat(a),
        Command::Distance(a) => cmd::distance(a),
        Command::NiceCheck(a) => cmd::nice_check(a),
        Command::SoftCheck(a) => cmd::soft_check(a),
        Command::EntropyCheck(a) => cmd::entropy_check(a),
        Command::MomentCheck(a) => cmd::moment_check(a),
        Command::GvCompare(a) => cmd::gv_compare(a),
        Command::Sweep(a) => cmd::sweep(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .with_context(|| format!("bad list entry `{t}`"))
        })
        .collect()
}

pub fn require(cond: bool, msg: &str) -> Result<()> {
    if !cond {
        bail!("{msg}");
    }
    Ok(())
}

pub fn hex_list(xs: impl IntoIterator<Item = u32>) -> Value {
    json!(xs.into_iter().map(|x| format!("{x:x}")).collect::<Vec<_>>())
}
