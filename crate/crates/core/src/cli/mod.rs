//! Argument definitions and dispatch.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lipone::rational::parse_rational;
use lipone::Rational;

mod commands;

pub use commands::run;

/// Exact-arithmetic toolkit for little-lip indicator functions, densities and Cantor-type sets.
#[derive(Debug, Parser)]
#[command(name = "lipone", version, about)]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = lipone::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Add decimal companion columns with this many significant digits.
    #[arg(long, global = true)]
    pub decimal: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub enum Outcome {
    Success,
    VerificationFailed,
}

pub fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

pub fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Set algebra on interval-set files.
    #[command(subcommand)]
    Set(SetCommand),
    /// Validate a chain, build f and evaluate it.
    Build(BuildArgs),
    /// One-sided density profiles and SOSD scans.
    Profile(ProfileArgs),
    /// Enclosures of lip f and Lip f at points.
    Lipscan(LipscanArgs),
    /// Level-k sets, multi-generation stages, density windows, full-measure assemblies.
    #[command(subcommand)]
    Cantor(CantorCommand),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum SetCommand {
    /// Union of all inputs.
    Union { files: Vec<PathBuf> },
    /// Intersection of all inputs.
    Intersect { files: Vec<PathBuf> },
    /// First input minus the others.
    Difference { files: Vec<PathBuf> },
    /// Complement in the real line, or in a closed window.
    Complement {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], value_parser = rational, allow_hyphen_values = true)]
        window: Option<Vec<Rational>>,
    },
    /// Lebesgue measure, optionally inside a closed window.
    Measure {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], value_parser = rational, allow_hyphen_values = true)]
        window: Option<Vec<Rational>>,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Chain file: {"stages": [set, ...]}.
    pub chain: PathBuf,
    /// Evaluate at these points.
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub eval: Vec<Rational>,
    /// Evaluate on N+1 equally spaced points of [LO, HI].
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_hyphen_values = true)]
    pub grid: Option<Vec<String>>,
    /// Evaluate the single term f_n instead of f.
    #[arg(long)]
    pub level: Option<u32>,
    /// Skip terms with 2^-n at most this value and report the skipped bound.
    #[arg(long, value_parser = rational)]
    pub tolerance: Option<Rational>,
    /// Breakpoint step factor (default 1/4).
    #[arg(long, value_parser = rational)]
    pub breakpoint_factor: Option<Rational>,
    /// Also report SOSD warnings for stage endpoints on stderr.
    #[arg(long)]
    pub diagnose: bool,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Interval-set file.
    pub set: PathBuf,
    /// Points to examine.
    #[arg(long = "point", value_parser = rational, allow_hyphen_values = true, required = true)]
    pub points: Vec<Rational>,
    /// Comma-separated decreasing radii for a density profile.
    #[arg(long, value_delimiter = ',', value_parser = rational)]
    pub radii: Vec<Rational>,
    /// Run an SOSD scan instead of a profile.
    #[arg(long)]
    pub scan: bool,
    #[arg(long, value_parser = rational, default_value = "1/1024")]
    pub rmin: Rational,
    #[arg(long, value_parser = rational, default_value = "1/4")]
    pub rmax: Rational,
    #[arg(long, value_parser = rational, default_value = "9/10")]
    pub threshold: Rational,
    #[arg(long, value_parser = rational, default_value = "1/2")]
    pub ratio: Rational,
}

#[derive(Debug, Args)]
pub struct LipscanArgs {
    /// Chain file.
    pub chain: PathBuf,
    #[arg(long = "point", value_parser = rational, allow_hyphen_values = true, required = true)]
    pub points: Vec<Rational>,
    #[arg(long, value_parser = rational, default_value = "1/65536")]
    pub rmin: Rational,
    #[arg(long, value_parser = rational, default_value = "1/16")]
    pub rmax: Rational,
    #[arg(long, value_parser = rational, default_value = "1/2")]
    pub ratio: Rational,
    #[arg(long, default_value_t = lipone::estimator::DEFAULT_REFINEMENT)]
    pub refinement: u32,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Schedule file: {"levels": [...], "budget": "p/q"}.
    #[arg(long, conflicts_with = "levels")]
    pub schedule: Option<PathBuf>,
    /// Comma-separated levels (default 4(n+2)).
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<u32>,
    /// Budget for explicit levels.
    #[arg(long, value_parser = rational, default_value = "1/2")]
    pub budget: Rational,
    /// Number of generations.
    #[arg(long)]
    pub depth: u32,
}

#[derive(Debug, Subcommand)]
pub enum CantorCommand {
    /// The level-k open set of (LO, HI).
    Level {
        #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "0")]
        lo: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "1")]
        hi: Rational,
        #[arg(short, long)]
        k: u32,
        /// Emit the tagged closed components instead of the open set.
        #[arg(long)]
        components: bool,
    },
    /// Ledger of a multi-generation stage on [0, 1].
    Stage {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Include the explicit closed set when it has at most this many components.
        #[arg(long)]
        emit_set: Option<usize>,
    },
    /// Density-window check of a stage on [0, 1].
    Check {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Add critical sample points so the reported maximum is exact.
        #[arg(long)]
        critical: bool,
        /// Check components of every pattern level, not only the finest.
        #[arg(long)]
        all_levels: bool,
    },
    /// Disjoint stages covering all but epsilon of a window.
    Full {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], value_parser = rational, allow_hyphen_values = true, default_values = ["0", "1"])]
        window: Vec<Rational>,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
        #[arg(long)]
        copies: u32,
        #[arg(long, default_value_t = 1)]
        depth: u32,
        /// Certify SOSD at this many seeded sample points of the union.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[arg(long, value_parser = rational, default_value = "1/4096")]
        rmin: Rational,
        #[arg(long, value_parser = rational, default_value = "1/16")]
        rmax: Rational,
        #[arg(long, value_parser = rational, default_value = "1/2")]
        threshold: Rational,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Restrict to these suites (interval, builder, estimator, cantor, density).
    #[arg(long = "suite")]
    pub suites: Vec<lipone::verify::Suite>,
    /// Depth of the Cantor checks.
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
    /// Replace the breakpoint step factor (values above 3/8 break the gap condition).
    #[arg(long, value_parser = rational)]
    pub breakpoint_factor: Option<Rational>,
}
