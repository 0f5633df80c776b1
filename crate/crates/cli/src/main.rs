//! `cantor`: exact Cantor-set constructions, staircase values, valuations,
//! measures and scale derivatives as CSV or JSON tables.

mod commands;
mod config;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cantor_analysis::Error;
use config::{Common, CommonFlags, Format, Layers};

#[derive(Debug)]
pub enum CliError {
    Analysis(Error),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Analysis(Error::ResourceCap { .. }) => 3,
            CliError::Analysis(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Analysis(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Analysis(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cantor", version, about = "Exact analysis on (p, q, r) Cantor sets")]
#[command(after_help = "Exit codes: 0 success, 2 domain or validation error, 3 resource cap.\n\
Exact rationals print as num/den; approximations print as decimals at the requested precision.")]
struct Cli {
    #[command(flatten)]
    common: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON object whose keys mirror the long flags; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Retained slots per step
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Deleted slots per step
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Slots per step, p + q
    #[arg(long, global = true)]
    r: Option<u32>,
    /// Comma-separated keep/gap slots, e.g. keep,gap,keep
    #[arg(long, global = true)]
    gap_pattern: Option<String>,
    /// Decimal digits for approximate reals (at least 6, default 30)
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Largest construction level accepted (default 20)
    #[arg(long, global = true)]
    level_cap: Option<usize>,
    /// csv or json (default csv)
    #[arg(long, global = true)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Retained and gap intervals of a level.
    ///
    /// Columns: level, kind, index, lo, hi. Rows are sorted by lo.
    Construct(commands::ConstructArgs),
    /// Cantor function values at a point, on a grid, or its inverse.
    ///
    /// Columns: x, y, exact, level; with --y: y, lo, hi, kind.
    Staircase(commands::StaircaseArgs),
    /// Valuation of a relative infinitesimal at a scale.
    ///
    /// Columns: x_tilde, scale, v, lambda; with --approach: alpha, epsilon, v.
    Valuation(commands::ValuationArgs),
    /// Valued zero-set of a level: gap intervals labelled by their value.
    ///
    /// Columns: level, gap_lo, gap_hi, value.
    Zeroset(commands::ZerosetArgs),
    /// Interval, point or separation norm.
    ///
    /// Columns: kind, level, x, y, epsilon, norm.
    Norm(commands::NormArgs),
    /// Multiplicative neighbours, or the level-k neighbour construction.
    ///
    /// Columns: x, exponent, x_plus, x_minus; with --level: k, j, x_minus,
    /// x_plus, value_minus, value, value_plus, right_gap, left_gap,
    /// right_value_gap, left_value_gap, balanced, max_ratio.
    Neighbors(commands::NeighborsArgs),
    /// Canonical-cover measure sums per level.
    ///
    /// Columns: n, count, mu_s, mu_v, ratio.
    Measure(commands::MeasureArgs),
    /// Scale derivatives, valuation derivatives or the local constancy check.
    ///
    /// Columns (scale): x, h, value, right, left, two_sided_gap.
    /// Columns (valuation): x, value, one_sided, flagged, base.
    /// Columns (constancy): level, max_slope, distinct_values, gaps.
    Derivative(commands::DerivativeArgs),
    /// First-order remainder in log coordinates.
    ///
    /// Columns: x0, x, gap, derivative, residual.
    Mvt(commands::MvtArgs),
    /// Corrected unit integral 1 - epsilon + v.
    ///
    /// Columns: epsilon, v_epsilon, value.
    Integral(commands::IntegralArgs),
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    let layers = Layers::load(cli.common.config.as_deref())?;
    let g = cli.common;
    let common = Common::resolve(
        &layers,
        CommonFlags {
            p: g.p,
            q: g.q,
            r: g.r,
            gap_pattern: g.gap_pattern,
            precision: g.precision,
            level_cap: g.level_cap,
            format: g.format,
        },
    )?;
    match cli.command {
        Command::Construct(a) => commands::construct(&common, &layers, a, out),
        Command::Staircase(a) => commands::staircase(&common, &layers, a, out),
        Command::Valuation(a) => commands::valuation(&common, &layers, a, out),
        Command::Zeroset(a) => commands::zeroset(&common, &layers, a, out),
        Command::Norm(a) => commands::norm(&common, &layers, a, out),
        Command::Neighbors(a) => commands::neighbors(&common, &layers, a, out),
        Command::Measure(a) => commands::measure(&common, &layers, a, out),
        Command::Derivative(a) => commands::derivative(&common, &layers, a, out),
        Command::Mvt(a) => commands::mvt(&common, &layers, a, out),
        Command::Integral(a) => commands::integral(&common, &layers, a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(|e| CliError::Io(e.to_string())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
