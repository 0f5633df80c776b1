//! One function per subcommand: resolve arguments, call the library, emit rows.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use cantor_analysis::calculus::{
    corrected_integral, locally_constant_check, mvt_residual, scale_derivative,
    scale_derivative_richardson, valuation_derivative_check, CatalogFunction, PiecewiseLinear,
    DEFAULT_LOG_STEP,
};
use cantor_analysis::cantor_set::{level_with_cap, IntervalKind, RationalInterval, DEFAULT_INTERVAL_CAP};
use cantor_analysis::measure::{measure_convergence_table, CanonicalTarget, ConvergenceRecord};
use cantor_analysis::numeric::{format_rational, parse_rational, rat, Real};
use cantor_analysis::staircase::{
    cantor_function, inverse_staircase, sample_grid, StaircaseRow, DEFAULT_MAX_LEVEL,
};
use cantor_analysis::valuation::{
    approach_valuation, infinitesimal_valuation, interval_norm, multiplicative_neighbors,
    neighbor_limit_construction, point_norm, separation_norm, valued_zero_set, NormExponent,
    Scale, ValuationProfile,
};

use crate::config::{float_list, rational_list, Common, Layers};
use crate::output::emit;
use crate::CliError;

type Out<'a> = &'a mut dyn Write;

fn kind_name(kind: IntervalKind) -> &'static str {
    match kind {
        IntervalKind::Retained => "retained",
        IntervalKind::Gap => "gap",
    }
}

fn exact_real(text: &str) -> Result<Real, CliError> {
    Ok(Real::exact(parse_rational(text)?))
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Construction level (default 1)
    #[arg(long)]
    level: Option<usize>,
}

#[derive(Serialize)]
struct IntervalRow {
    level: usize,
    kind: &'static str,
    index: usize,
    lo: String,
    hi: String,
}

pub fn construct(c: &Common, l: &Layers, a: ConstructArgs, out: Out) -> Result<(), CliError> {
    let n = c.check_level(l.get(a.level, "level")?.unwrap_or(1))?;
    let approx = level_with_cap(&c.spec, n, DEFAULT_INTERVAL_CAP)?;
    let numbered = |list: &[RationalInterval]| -> Vec<IntervalRow> {
        list.iter()
            .enumerate()
            .map(|(i, f)| IntervalRow {
                level: n,
                kind: kind_name(f.kind),
                index: i + 1,
                lo: format_rational(&f.lo),
                hi: format_rational(&f.hi),
            })
            .collect()
    };
    let mut rows = numbered(&approx.retained);
    rows.extend(numbered(&approx.gaps));
    let key = |row: &IntervalRow| parse_rational(&row.lo).expect("formatted rational");
    rows.sort_by_cached_key(key);
    emit(out, c.format, &rows)
}

#[derive(Debug, Args)]
pub struct StaircaseArgs {
    /// Single exact query point
    #[arg(long)]
    x: Option<String>,
    /// Uniform grid size on [0, 1]
    #[arg(long)]
    samples: Option<usize>,
    /// Preimage of a staircase value
    #[arg(long)]
    y: Option<String>,
    /// Digits examined before giving up on an exact value (default 256)
    #[arg(long)]
    max_level: Option<usize>,
}

#[derive(Serialize)]
struct PreimageRow {
    y: String,
    lo: String,
    hi: String,
    kind: &'static str,
}

pub fn staircase(c: &Common, l: &Layers, a: StaircaseArgs, out: Out) -> Result<(), CliError> {
    let max_level = l.get(a.max_level, "max_level")?.unwrap_or(DEFAULT_MAX_LEVEL);
    if let Some(y) = l.rational(a.y, "y")? {
        let pre = inverse_staircase(&c.spec, &y, max_level)?;
        let row = PreimageRow {
            y: format_rational(&y),
            lo: format_rational(&pre.lo),
            hi: format_rational(&pre.hi),
            kind: kind_name(pre.kind),
        };
        return emit(out, c.format, &[row]);
    }
    let values = match (l.rational(a.x, "x")?, l.get(a.samples, "samples")?) {
        (Some(x), _) => vec![cantor_function(&c.spec, &x, max_level)?],
        (None, Some(count)) => sample_grid(&c.spec, count, max_level)?,
        (None, None) => return Err(CliError::usage("staircase needs --x, --samples or --y")),
    };
    let rows: Vec<StaircaseRow> = values.iter().map(StaircaseRow::from).collect();
    emit(out, c.format, &rows)
}

#[derive(Debug, Args)]
pub struct ValuationArgs {
    /// Scale, 0 < epsilon < 1
    #[arg(long)]
    epsilon: Option<String>,
    /// Relative infinitesimal, 0 < x < epsilon
    #[arg(long)]
    x: Option<String>,
    /// Real point whose valuation is traced as the scale decreases to it
    #[arg(long)]
    approach: Option<String>,
    /// Number of scales for --approach (default 10)
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Serialize)]
struct ApproachRow {
    alpha: String,
    epsilon: String,
    v: String,
}

pub fn valuation(c: &Common, l: &Layers, a: ValuationArgs, out: Out) -> Result<(), CliError> {
    if let Some(alpha) = l.rational(a.approach, "approach")? {
        let steps = l.get(a.steps, "steps")?.unwrap_or(10);
        let rows: Vec<ApproachRow> = approach_valuation(&alpha, steps, c.precision)?
            .into_iter()
            .map(|(eps, v)| ApproachRow {
                alpha: format_rational(&alpha),
                epsilon: format_rational(&eps),
                v: v.to_string(),
            })
            .collect();
        return emit(out, c.format, &rows);
    }
    let scale = Scale::new(l.require_rational(a.epsilon, "epsilon")?)?;
    let x = l.require_rational(a.x, "x")?;
    let vi = infinitesimal_valuation(&x, &scale, c.precision)?;
    emit(out, c.format, &[vi])
}

#[derive(Debug, Args)]
pub struct ZerosetArgs {
    /// Construction level (default 1)
    #[arg(long)]
    level: Option<usize>,
}

pub fn zeroset(c: &Common, l: &Layers, a: ZerosetArgs, out: Out) -> Result<(), CliError> {
    let n = c.check_level(l.get(a.level, "level")?.unwrap_or(1))?;
    let set = valued_zero_set(&c.spec, n)?;
    if let Some(note) = &set.note {
        eprintln!("note: {note}");
    }
    emit(out, c.format, &set.rows())
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Level of a canonical interval
    #[arg(long)]
    level: Option<usize>,
    /// Point of the set
    #[arg(long)]
    x: Option<String>,
    /// Second point, for the separation norm
    #[arg(long)]
    y: Option<String>,
    /// Scale, for the point norm
    #[arg(long)]
    epsilon: Option<String>,
    /// Exponent of the point norm (default: the dimension)
    #[arg(long)]
    s0: Option<String>,
    /// Comma-separated positive coefficients of the point norm (default 1)
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Serialize, Default)]
struct NormRow {
    kind: &'static str,
    level: Option<usize>,
    x: Option<String>,
    y: Option<String>,
    epsilon: Option<String>,
    norm: String,
}

pub fn norm(c: &Common, l: &Layers, a: NormArgs, out: Out) -> Result<(), CliError> {
    let x = l.rational(a.x, "x")?;
    let row = if let Some(n) = l.get(a.level, "level")? {
        let n = c.check_level(n)?;
        NormRow {
            kind: "interval",
            level: Some(n),
            norm: format_rational(&interval_norm(&c.spec, n)),
            ..NormRow::default()
        }
    } else if let (Some(x), Some(y)) = (&x, l.rational(a.y, "y")?) {
        NormRow {
            kind: "separation",
            x: Some(format_rational(x)),
            y: Some(format_rational(&y)),
            norm: format_rational(&separation_norm(&c.spec, x, &y)?),
            ..NormRow::default()
        }
    } else if let (Some(x), Some(eps)) = (&x, l.rational(a.epsilon, "epsilon")?) {
        let s0 = match l.get(a.s0, "s0")? {
            Some(text) => NormExponent::Value(exact_real(&text)?),
            None => NormExponent::Dimension,
        };
        let alphas = match l.get(a.alpha, "alpha")? {
            Some(text) => rational_list(&text)?,
            None => vec![rat(1, 1)],
        };
        let profile = ValuationProfile::new(alphas, s0)?;
        let value = point_norm(x, &Scale::new(eps.clone())?, &c.spec, &profile, c.precision)?;
        NormRow {
            kind: "point",
            x: Some(format_rational(x)),
            epsilon: Some(format_rational(&eps)),
            norm: value.to_string(),
            ..NormRow::default()
        }
    } else {
        return Err(CliError::usage("norm needs --level, --x with --y, or --x with --epsilon"));
    };
    emit(out, c.format, &[row])
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    /// Base point
    #[arg(long)]
    x: Option<String>,
    /// Exponent of the multiplicative perturbation
    #[arg(long)]
    exponent: Option<String>,
    /// Level of the finite neighbour construction
    #[arg(long)]
    level: Option<usize>,
}

pub fn neighbors(c: &Common, l: &Layers, a: NeighborsArgs, out: Out) -> Result<(), CliError> {
    let x = l.require_rational(a.x, "x")?;
    if let Some(k) = l.get(a.level, "level")? {
        let k = c.check_level(k)?;
        return emit(out, c.format, &[neighbor_limit_construction(&c.spec, &x, k)?]);
    }
    let exponent = exact_real(&l.require::<String>(a.exponent, "exponent")?)?;
    emit(out, c.format, &[multiplicative_neighbors(&x, &exponent, c.precision)?])
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Finest level of the table (default 8)
    #[arg(long)]
    level: Option<usize>,
    /// Exponent of the sums (default: the dimension)
    #[arg(long)]
    exponent: Option<String>,
    /// Retained construction intervals, lo:hi separated by commas (default: whole set)
    #[arg(long)]
    target: Option<String>,
}

fn parse_target(c: &Common, text: &str) -> Result<CanonicalTarget, CliError> {
    let intervals = text
        .split(',')
        .map(|piece| {
            let (lo, hi) = piece
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("target piece {piece:?} is not lo:hi")))?;
            let (lo, hi) = (parse_rational(lo)?, parse_rational(hi)?);
            if lo > hi {
                return Err(CliError::usage(format!("target piece {piece:?} has lo > hi")));
            }
            Ok(RationalInterval::new(lo, hi, IntervalKind::Retained))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(CanonicalTarget::from_intervals(&c.spec, &intervals)?)
}

pub fn measure(c: &Common, l: &Layers, a: MeasureArgs, out: Out) -> Result<(), CliError> {
    let n = c.check_level(l.get(a.level, "level")?.unwrap_or(8))?;
    let target = match l.get(a.target, "target")? {
        Some(text) => parse_target(c, &text)?,
        None => CanonicalTarget::whole(),
    };
    c.check_level(target.finest_level())?;
    let exponent = l.get(a.exponent, "exponent")?.map(|s: String| exact_real(&s)).transpose()?;
    let rows = measure_convergence_table(&c.spec, &target, n, exponent.as_ref(), c.precision)?;
    let records: Vec<ConvergenceRecord> = rows.iter().map(ConvergenceRecord::from).collect();
    emit(out, c.format, &records)
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// pow:A, abs, const:C, staircase or exp-log2
    #[arg(long)]
    function: Option<String>,
    /// CSV file with an x,y header, interpolated linearly
    #[arg(long)]
    table: Option<PathBuf>,
}

fn catalog(c: &Common, l: &Layers, a: FunctionArgs) -> Result<CatalogFunction, CliError> {
    if let Some(path) = l.get(a.table, "table")? {
        let file = File::open(&path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        return Ok(CatalogFunction::Table(PiecewiseLinear::from_csv(file)?));
    }
    let name: String = l.require(a.function, "function")?;
    Ok(CatalogFunction::parse(&name, &c.spec)?)
}

#[derive(Debug, Args)]
pub struct DerivativeArgs {
    /// scale, valuation or constancy (default scale)
    #[arg(long)]
    mode: Option<String>,
    #[command(flatten)]
    function: FunctionArgs,
    /// Comma-separated sample points
    #[arg(long)]
    x: Option<String>,
    /// Log-step of the central difference (default 1e-6)
    #[arg(long)]
    h: Option<f64>,
    /// Combine steps h and 2h by Richardson extrapolation
    #[arg(long)]
    richardson: bool,
    /// Scale for the valuation mode
    #[arg(long)]
    epsilon: Option<String>,
    /// Relative step for the valuation mode (default 1/1000)
    #[arg(long)]
    delta: Option<String>,
    /// Level for the constancy mode (default 1)
    #[arg(long)]
    level: Option<usize>,
}

#[derive(Serialize)]
struct ConstancyRow {
    level: usize,
    max_slope: String,
    distinct_values: usize,
    gaps: usize,
}

pub fn derivative(c: &Common, l: &Layers, a: DerivativeArgs, out: Out) -> Result<(), CliError> {
    let mode: String = l.get(a.mode, "mode")?.unwrap_or_else(|| "scale".into());
    match mode.as_str() {
        "scale" => {
            let f = catalog(c, l, a.function)?;
            let xs = float_list(&l.require::<String>(a.x, "x")?)?;
            let h = l.get(a.h, "h")?.unwrap_or(DEFAULT_LOG_STEP);
            let richardson = l.flag(a.richardson, "richardson")?;
            let eval = |x: f64| f.eval(x);
            let rows = xs
                .iter()
                .map(|&x| {
                    if richardson {
                        scale_derivative_richardson(&eval, x, h)
                    } else {
                        scale_derivative(&eval, x, h)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(out, c.format, &rows)
        }
        "valuation" => {
            let scale = Scale::new(l.require_rational(a.epsilon, "epsilon")?)?;
            let xs = rational_list(&l.require::<String>(a.x, "x")?)?;
            let delta = l.rational(a.delta, "delta")?.unwrap_or_else(|| rat(1, 1000));
            let rows = valuation_derivative_check(&scale, &xs, &delta, c.precision)?;
            emit(out, c.format, &rows)
        }
        "constancy" => {
            let n = c.check_level(l.get(a.level, "level")?.unwrap_or(1))?;
            let check = locally_constant_check(&c.spec, n)?;
            let row = ConstancyRow {
                level: n,
                max_slope: format_rational(&check.max_slope),
                distinct_values: check.distinct_values(),
                gaps: check.gap_values.len(),
            };
            emit(out, c.format, &[row])
        }
        other => Err(CliError::usage(format!(
            "unknown mode {other:?}, expected scale, valuation or constancy"
        ))),
    }
}

#[derive(Debug, Args)]
pub struct MvtArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Base point X0
    #[arg(long)]
    x0: Option<f64>,
    /// Comma-separated end points X
    #[arg(long)]
    x: Option<String>,
    /// Gap used in place of log(X/X0)
    #[arg(long)]
    gap: Option<f64>,
    /// Log-step for the derivative at X0 (default 1e-5)
    #[arg(long)]
    h: Option<f64>,
}

pub fn mvt(c: &Common, l: &Layers, a: MvtArgs, out: Out) -> Result<(), CliError> {
    let f = catalog(c, l, a.function)?;
    let x0 = l.require(a.x0, "x0")?;
    let xs = float_list(&l.require::<String>(a.x, "x")?)?;
    let gap = l.get(a.gap, "gap")?;
    let h = l.get(a.h, "h")?.unwrap_or(1e-5);
    let eval = |x: f64| f.eval(x);
    let rows = xs
        .iter()
        .map(|&x| mvt_residual(&eval, x0, x, gap, h))
        .collect::<Result<Vec<_>, _>>()?;
    emit(out, c.format, &rows)
}

#[derive(Debug, Args)]
pub struct IntegralArgs {
    /// Scale, 0 < epsilon < 1
    #[arg(long)]
    epsilon: Option<String>,
    /// Valuation value substituted for the sub-scale part
    #[arg(long)]
    v: Option<String>,
}

#[derive(Serialize)]
struct IntegralRow {
    epsilon: String,
    v_epsilon: String,
    value: String,
}

pub fn integral(c: &Common, l: &Layers, a: IntegralArgs, out: Out) -> Result<(), CliError> {
    let eps = l.require_rational(a.epsilon, "epsilon")?;
    let v = exact_real(&l.require::<String>(a.v, "v")?)?;
    let result = corrected_integral(&eps, &v)?;
    let row = IntegralRow {
        epsilon: format_rational(&result.epsilon),
        v_epsilon: result.v_epsilon.to_string(),
        value: result.value.to_string(),
    };
    emit(out, c.format, &[row])
}
