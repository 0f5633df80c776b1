//! Scale-invariant calculus: logarithmic derivatives, local constancy of the
//! staircase, and the valuation-corrected integral.

use std::io::Read;

use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor_set::{level, IfsSpec};
use crate::error::{Error, Result};
use crate::numeric::{format_rational, log_ratio, Rational, Real};
use crate::staircase::cantor_function;
use crate::valuation::Scale;

/// Default log-step for [`scale_derivative`].
pub const DEFAULT_LOG_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDerivativeResult {
    pub x: f64,
    pub h: f64,
    pub value: f64,
    pub right: f64,
    pub left: f64,
    /// `|right − left|`
    pub two_sided_gap: f64,
}

fn log_sample(f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    let y = f(x);
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::domain(format!(
            "function must be positive near the sample point, f({x:e}) = {y:e}"
        )));
    }
    Ok(y.ln())
}

/// `d log f / d log |x|` by central differences at `x·e^(±h)`.
///
/// The samples keep the sign of `x`, so negative arguments are handled
/// through `log |x|`.
pub fn scale_derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> Result<LogDerivativeResult> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::domain("logarithmic derivative needs x ≠ 0"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain("log-step h must be positive"));
    }
    let up = log_sample(f, x * h.exp())?;
    let mid = log_sample(f, x)?;
    let down = log_sample(f, x * (-h).exp())?;
    let right = (up - mid) / h;
    let left = (mid - down) / h;
    Ok(LogDerivativeResult {
        x,
        h,
        value: (up - down) / (2.0 * h),
        right,
        left,
        two_sided_gap: (right - left).abs(),
    })
}

/// One Richardson step on [`scale_derivative`]: `(4·D(h/2) − D(h)) / 3`.
pub fn scale_derivative_richardson(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> Result<LogDerivativeResult> {
    let coarse = scale_derivative(f, x, h)?;
    let fine = scale_derivative(f, x, h / 2.0)?;
    Ok(LogDerivativeResult {
        value: (4.0 * fine.value - coarse.value) / 3.0,
        ..fine
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalConstancy {
    pub level: usize,
    /// `max |x·Δv/Δx|` over samples inside each gap; exactly zero.
    pub max_slope: Rational,
    /// Staircase value on each gap, left to right.
    pub gap_values: Vec<Rational>,
    /// Differences between consecutive gap values.
    pub jumps: Vec<Rational>,
}

impl LocalConstancy {
    pub fn distinct_values(&self) -> usize {
        let mut v = self.gap_values.clone();
        v.sort();
        v.dedup();
        v.len()
    }
}

/// Evaluates the staircase at both ends and the midpoint of every level-`n`
/// gap and reports the largest scaled slope inside a gap.
pub fn locally_constant_check(spec: &IfsSpec, n: usize) -> Result<LocalConstancy> {
    if n < 1 {
        return Err(Error::domain("level must be at least 1"));
    }
    let exact = |x: &Rational| -> Result<Rational> {
        let v = cantor_function(spec, x, n + 2)?;
        debug_assert!(v.exact);
        Ok(v.y)
    };
    let mut max_slope = Rational::zero();
    let mut gap_values = Vec::new();
    for gap in level(spec, n)?.gaps {
        let mid = gap.midpoint();
        let samples = [gap.lo.clone(), mid, gap.hi.clone()];
        let values = samples.iter().map(exact).collect::<Result<Vec<_>>>()?;
        for i in 0..2 {
            let (x0, x1) = (&samples[i], &samples[i + 1]);
            let slope = (x0 * (&values[i + 1] - &values[i]) / (x1 - x0)).abs();
            max_slope = max_slope.max(slope);
        }
        gap_values.push(values[1].clone());
    }
    let jumps = gap_values.windows(2).map(|w| &w[1] - &w[0]).collect();
    Ok(LocalConstancy {
        level: n,
        max_slope,
        gap_values,
        jumps,
    })
}

/// Base convention used by [`valuation_derivative_check`].
pub const VALUATION_LOG_BASE: &str = "log_{1/epsilon}";

#[derive(Debug, Clone, Serialize)]
pub struct ValuationDerivative {
    pub x: String,
    /// `dv / d log_{1/ε}(1/x)`, absent for flagged samples.
    pub value: Option<f64>,
    pub one_sided: bool,
    pub flagged: bool,
    pub base: &'static str,
}

/// Differentiates `v(x) = log_{1/ε}(ε/x)` with respect to `log_{1/ε}(1/x)`
/// using the relative perturbation `x(1 ± δ)`.
///
/// Samples outside `(0, ε]` are flagged; at `x = ε` the difference is one-sided.
pub fn valuation_derivative_check(
    scale: &Scale,
    samples: &[Rational],
    delta: &Rational,
    precision: u32,
) -> Result<Vec<ValuationDerivative>> {
    if !delta.is_positive() || delta >= &Rational::one() {
        return Err(Error::domain("relative step must lie in (0, 1)"));
    }
    let eps = scale.epsilon();
    let base = eps.recip();
    let one = Rational::one();
    samples
        .iter()
        .map(|x| {
            let mut out = ValuationDerivative {
                x: format_rational(x),
                value: None,
                one_sided: false,
                flagged: true,
                base: VALUATION_LOG_BASE,
            };
            if !x.is_positive() || x > eps {
                return Ok(out);
            }
            let lower = x * (&one - delta);
            let upper = if x == eps {
                out.one_sided = true;
                x.clone()
            } else {
                (x * (&one + delta)).min(eps.clone())
            };
            let dv = scale
                .valuation_of(&lower, precision)?
                .sub(&scale.valuation_of(&upper, precision)?);
            let dt = log_ratio(&(&upper / &lower), &base, precision)?;
            out.value = Some(dv.div(&dt).to_f64());
            out.flagged = false;
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MvtResidual {
    pub x0: f64,
    pub x: f64,
    pub gap: f64,
    pub derivative: f64,
    pub residual: f64,
}

/// Remainder of the first-order model in log coordinates:
/// `|log f(X) − log f(X₀) − f'(X₀)·gap|`.
///
/// `gap` defaults to `log(X/X₀)`; the derivative is [`scale_derivative`] at `X₀`.
pub fn mvt_residual(
    f: &dyn Fn(f64) -> f64,
    x0: f64,
    x: f64,
    gap: Option<f64>,
    h: f64,
) -> Result<MvtResidual> {
    if x0 == 0.0 || x == 0.0 || (x0 < 0.0) != (x < 0.0) {
        return Err(Error::domain("X and X0 must be nonzero with the same sign"));
    }
    let derivative = scale_derivative(f, x0, h)?.value;
    let gap = gap.unwrap_or_else(|| (x / x0).ln());
    let residual = (log_sample(f, x)? - log_sample(f, x0)? - derivative * gap).abs();
    Ok(MvtResidual {
        x0,
        x,
        gap,
        derivative,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub epsilon: Rational,
    pub v_epsilon: Real,
    /// `1 − ε + v(ε)`
    pub value: Real,
}

/// `∫₀¹ dx` with the sub-scale part replaced by the valuation: `1 − ε + v(ε)`.
pub fn corrected_integral(epsilon: &Rational, v_epsilon: &Real) -> Result<IntegralResult> {
    Scale::new(epsilon.clone())?;
    if v_epsilon.to_rational().is_negative() {
        return Err(Error::domain("valuation correction must be nonnegative"));
    }
    let value = Real::exact(Rational::one() - epsilon).add(v_epsilon);
    Ok(IntegralResult {
        epsilon: epsilon.clone(),
        v_epsilon: v_epsilon.clone(),
        value,
    })
}

/// Piecewise-linear function through `(x, y)` nodes sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    nodes: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
struct Node {
    x: f64,
    y: f64,
}

impl PiecewiseLinear {
    pub fn new(mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::domain("a table needs at least two nodes"));
        }
        if nodes.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::domain("table nodes must be finite"));
        }
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        if nodes.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("table abscissae must be distinct"));
        }
        Ok(PiecewiseLinear { nodes })
    }

    /// Reads a CSV with an `x,y` header.
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let nodes = rdr
            .deserialize::<Node>()
            .map(|row| row.map(|n| (n.x, n.y)).map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nodes)
    }

    /// Linear interpolation; NaN outside the tabulated range.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.nodes.partition_point(|n| n.0 < x);
        if i == 0 {
            return if x == self.nodes[0].0 { self.nodes[0].1 } else { f64::NAN };
        }
        if i == self.nodes.len() {
            return f64::NAN;
        }
        let ((x0, y0), (x1, y1)) = (self.nodes[i - 1], self.nodes[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Built-in functions for the command line.
#[derive(Debug, Clone)]
pub enum CatalogFunction {
    Power(f64),
    Abs,
    Const(f64),
    Staircase(IfsSpec),
    /// `exp(log² x)`
    ExpLogSquared,
    Table(PiecewiseLinear),
}

impl CatalogFunction {
    /// Parses `pow:A`, `abs`, `const:C`, `staircase`, `exp-log2`; tables are
    /// built separately with [`PiecewiseLinear::from_csv`].
    pub fn parse(name: &str, spec: &IfsSpec) -> Result<Self> {
        let number = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(name.to_string()))
        };
        match name.split_once(':') {
            Some(("pow", a)) => Ok(CatalogFunction::Power(number(a)?)),
            Some(("const", c)) => Ok(CatalogFunction::Const(number(c)?)),
            None if name == "abs" => Ok(CatalogFunction::Abs),
            None if name == "staircase" => Ok(CatalogFunction::Staircase(spec.clone())),
            None if name == "exp-log2" => Ok(CatalogFunction::ExpLogSquared),
            _ => Err(Error::Parse(format!("unknown function {name:?}"))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CatalogFunction::Power(a) => x.powf(*a),
            CatalogFunction::Abs => x.abs(),
            CatalogFunction::Const(c) => *c,
            CatalogFunction::Staircase(spec) => {
                let Some(q) = Rational::from_f64(x) else {
                    return f64::NAN;
                };
                match cantor_function(spec, &q, 64) {
                    Ok(v) => v.y.to_f64().unwrap_or(f64::NAN),
                    Err(_) => f64::NAN,
                }
            }
            CatalogFunction::ExpLogSquared => x.ln().powi(2).exp(),
            CatalogFunction::Table(t) => t.eval(x),
        }
    }
}
