use std::cmp::Ordering;
use std::fmt;

use dashu_float::round::mode::HalfEven;
use dashu_float::{ConstCache, FBig};
use dashu_int::{IBig, Sign as DSign, UBig};
use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{approx_ln, exact_log_ratio, format_rational, int, pow_rational_exact, Rational};
use crate::error::{Error, Result};

/// Binary floating point with arbitrary precision.
pub type Float = FBig<HalfEven, 2>;

/// Decimal digits carried by default.
pub const DEFAULT_PRECISION: u32 = 30;

const GUARD_BITS: usize = 24;

pub(crate) fn bits_for_digits(digits: u32) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
}

fn to_ibig(n: &BigInt) -> IBig {
    let (sign, bytes) = n.to_bytes_le();
    let mag = UBig::from_le_bytes(&bytes);
    let sign = if sign == Sign::Minus { DSign::Negative } else { DSign::Positive };
    IBig::from_parts(sign, mag)
}

fn from_ibig(n: &IBig) -> BigInt {
    let (sign, mag) = n.clone().into_parts();
    let sign = if sign == DSign::Negative { Sign::Minus } else { Sign::Plus };
    BigInt::from_bytes_le(sign, &mag.to_le_bytes())
}

/// Rounds a rational to a float with `bits` of precision.
pub fn rational_to_float(x: &Rational, bits: usize) -> Float {
    let n = Float::from(to_ibig(x.numer())).with_precision(bits).value();
    let d = Float::from(to_ibig(x.denom())).with_precision(bits).value();
    n / d
}

/// The exact value of a (finite) binary float.
pub fn float_to_rational(x: &Float) -> Rational {
    let (sig, exp) = x.repr().clone().into_parts();
    let sig = Rational::from_integer(from_ibig(&sig));
    let two = int(2);
    match exp.cmp(&0) {
        Ordering::Equal => sig,
        _ => sig * super::rational_powi(&two, exp as i64),
    }
}

/// Natural logarithm of a positive rational to `bits` of relative precision.
/// Arguments near 1 go through `ln_1p` of the exactly computed offset.
pub fn ln_rational(x: &Rational, bits: usize) -> Float {
    let offset = x - Rational::one();
    with_cache(|cache| {
        let rounded = if offset.abs() < super::rat(1, 2) {
            let f = rational_to_float(&offset, bits);
            f.context().ln_1p(f.repr(), Some(cache))
        } else {
            let f = rational_to_float(x, bits);
            f.context().ln(f.repr(), Some(cache))
        };
        rounded.expect("logarithm of a positive finite value").value()
    })
}

/// `e^x` at the precision of `x`.
pub fn exp_float(x: &Float) -> Float {
    with_cache(|cache| {
        x.context()
            .exp(x.repr(), Some(cache))
            .expect("exponential of a finite value")
            .value()
    })
}

thread_local! {
    // ln 2 and friends, reused across calls at the same or lower precision
    static CONSTANTS: std::cell::RefCell<ConstCache> = const { std::cell::RefCell::new(ConstCache::new()) };
}

fn with_cache<T>(f: impl FnOnce(&mut ConstCache) -> T) -> T {
    CONSTANTS.with(|c| f(&mut c.borrow_mut()))
}

/// A real number: exact when known to be rational, otherwise a float whose
/// absolute error is within `10^-digits`.
#[derive(Debug, Clone)]
pub enum Real {
    Exact(Rational),
    Approx { value: Float, digits: u32 },
}

impl Real {
    pub fn exact(x: Rational) -> Self {
        Real::Exact(x)
    }

    pub fn approx(value: Float, digits: u32) -> Self {
        Real::Approx { value, digits }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx { .. } => None,
        }
    }

    /// Precision in decimal digits; `None` for exact values.
    pub fn digits(&self) -> Option<u32> {
        match self {
            Real::Exact(_) => None,
            Real::Approx { digits, .. } => Some(*digits),
        }
    }

    /// The represented value as an exact rational (floats are dyadic).
    pub fn to_rational(&self) -> Rational {
        match self {
            Real::Exact(r) => r.clone(),
            Real::Approx { value, .. } => float_to_rational(value),
        }
    }

    pub fn to_float(&self, bits: usize) -> Float {
        match self {
            Real::Exact(r) => rational_to_float(r, bits),
            Real::Approx { value, .. } => value.clone().with_precision(bits).value(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Real::Approx { value, .. } => value.to_f64().value(),
        }
    }

    fn combine_digits(&self, other: &Real) -> u32 {
        match (self.digits(), other.digits()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => DEFAULT_PRECISION,
        }
    }

    fn binary(
        &self,
        other: &Real,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        float: impl Fn(Float, Float) -> Float,
    ) -> Real {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(exact(a, b)),
            _ => {
                let digits = self.combine_digits(other);
                let bits = bits_for_digits(digits);
                Real::approx(float(self.to_float(bits), other.to_float(bits)), digits)
            }
        }
    }

    pub fn add(&self, other: &Real) -> Real {
        self.binary(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.binary(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn mul(&self, other: &Real) -> Real {
        self.binary(other, |a, b| a * b, |a, b| a * b)
    }

    /// Panics on division by an exact zero.
    pub fn div(&self, other: &Real) -> Real {
        self.binary(other, |a, b| a / b, |a, b| a / b)
    }

    pub fn abs_diff(&self, other: &Real) -> Rational {
        (self.to_rational() - other.to_rational()).abs()
    }

    /// `self ≤ other + tol`, comparing represented values exactly.
    pub fn le_within(&self, other: &Real, tol: &Rational) -> bool {
        self.to_rational() <= other.to_rational() + tol
    }

    /// Decimal rendering with `digits` places after the point.
    pub fn to_decimal(&self, digits: u32) -> String {
        let x = self.to_rational();
        let negative = x.is_negative();
        let scaled = x.abs() * super::rational_powi(&int(10), digits as i64);
        // round half up on the magnitude
        let rounded = (scaled + super::rat(1, 2)).floor().to_integer();
        let mut s = rounded.to_string();
        let d = digits as usize;
        if s.len() <= d {
            s = format!("{}{}", "0".repeat(d + 1 - s.len()), s);
        }
        let (whole, frac) = s.split_at(s.len() - d);
        let mut out = String::new();
        if negative && !rounded.is_zero() {
            out.push('-');
        }
        out.push_str(whole);
        if d > 0 {
            out.push('.');
            out.push_str(frac);
        }
        out
    }
}

impl From<Rational> for Real {
    fn from(x: Rational) -> Self {
        Real::Exact(x)
    }
}

impl fmt::Display for Real {
    /// Exact values as `num/den`, approximations as decimals at their precision.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => f.write_str(&format_rational(r)),
            Real::Approx { digits, .. } => f.write_str(&self.to_decimal(*digits)),
        }
    }
}

/// `ln(a) / ln(b)` with absolute error at most `10^-precision_digits`.
///
/// Returns an exact rational whenever `a = b^k` for rational `k`.
pub fn log_ratio(a: &Rational, b: &Rational, precision_digits: u32) -> Result<Real> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::domain(format!(
            "logarithm of a nonpositive argument ({}, {})",
            format_rational(a),
            format_rational(b)
        )));
    }
    if b.is_one() {
        return Err(Error::domain("logarithm base must differ from 1"));
    }
    if let Some(k) = exact_log_ratio(a, b) {
        return Ok(Real::Exact(k));
    }
    // relative error of the quotient is a few ulps, so widen by the magnitude
    let estimate = (approx_ln(a) / approx_ln(b)).abs();
    let extra = if estimate > 1.0 {
        estimate.log2().ceil() as usize
    } else {
        0
    };
    let bits = bits_for_digits(precision_digits) + extra;
    let q = ln_rational(a, bits) / ln_rational(b, bits);
    Ok(Real::approx(q, precision_digits))
}

/// `base^exponent` for a positive rational base, exact when the result is rational.
pub fn pow_real(base: &Rational, exponent: &Real, precision_digits: u32) -> Result<Real> {
    if !base.is_positive() {
        return Err(Error::domain(format!(
            "power of nonpositive base {}",
            format_rational(base)
        )));
    }
    if let Real::Exact(e) = exponent {
        if let Some(r) = pow_rational_exact(base, e) {
            return Ok(Real::Exact(r));
        }
    }
    // absolute error of the exponent argument becomes relative error of the result
    let arg = (exponent.to_f64() * approx_ln(base)).abs();
    let extra = if arg > 1.0 { arg.log2().ceil() as usize } else { 0 };
    let magnitude = (exponent.to_f64() * approx_ln(base)).max(0.0) / std::f64::consts::LN_2;
    let bits = bits_for_digits(precision_digits) + extra + magnitude.ceil() as usize;
    let value = exp_float(&(exponent.to_float(bits) * ln_rational(base, bits)));
    Ok(Real::approx(value, precision_digits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{parse_rational, rat};

    fn close(x: &Real, reference: &str, tol: &str) -> bool {
        let r = parse_rational(reference).unwrap();
        (x.to_rational() - r).abs() <= parse_rational(tol).unwrap()
    }

    #[test]
    fn exact_cases() {
        let half = log_ratio(&int(3), &int(9), 30).unwrap();
        assert_eq!(half.as_rational(), Some(&rat(1, 2)));
        let one = log_ratio(&int(5), &int(5), 30).unwrap();
        assert_eq!(one.as_rational(), Some(&int(1)));
    }

    #[test]
    fn log_two_over_log_three() {
        // mpmath, 50 digits
        let reference = "0.63092975357145743709952711434276085429958564013188";
        let q = log_ratio(&int(2), &int(3), 12).unwrap();
        assert!(!q.is_exact());
        assert!(close(&q, reference, "1e-12"));
        assert_eq!(q.to_decimal(12), "0.630929753571");
        let q = log_ratio(&int(2), &int(3), 40).unwrap();
        assert!(close(&q, reference, "1e-40"));
    }

    #[test]
    fn near_one_arguments_keep_precision() {
        // ln(1 + 1e-20) / ln 2, mpmath
        let a = parse_rational("1.00000000000000000001").unwrap();
        let q = log_ratio(&a, &int(2), 40).unwrap();
        assert!(close(&q, "1.44269504088896340735271120579744732038989173279044e-20", "1e-40"));
        // base near one: ln 2 / ln(1 + 1e-6)
        let b = parse_rational("1.000001").unwrap();
        let q = log_ratio(&int(2), &b, 20).unwrap();
        // mpmath
        assert!(close(&q, "693147.52713347782715372128219707931410279", "1e-20"));
    }

    #[test]
    fn reciprocal_product_is_one() {
        let pairs = [(2, 3), (7, 5), (11, 2), (3, 100)];
        for (a, b) in pairs {
            let x = log_ratio(&int(a), &int(b), 30).unwrap();
            let y = log_ratio(&int(b), &int(a), 30).unwrap();
            let prod = x.mul(&y).to_rational();
            assert!((prod - int(1)).abs() <= parse_rational("2e-30").unwrap());
        }
    }

    #[test]
    fn domain_errors() {
        assert!(log_ratio(&int(0), &int(3), 10).is_err());
        assert!(log_ratio(&int(2), &int(-3), 10).is_err());
        assert!(log_ratio(&int(2), &int(1), 10).is_err());
    }

    #[test]
    fn powers() {
        let e = Real::exact(rat(-11, 10));
        let p = pow_real(&int(2), &e, 30).unwrap();
        // mpmath: 2^-1.1
        assert!(close(&p, "0.46651649576840370799067163307497108351361498217575", "1e-30"));
        let p = pow_real(&rat(1, 9), &Real::exact(rat(1, 2)), 30).unwrap();
        assert_eq!(p.as_rational(), Some(&rat(1, 3)));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Real::exact(rat(1499, 1000)).to_decimal(4), "1.4990");
        assert_eq!(Real::exact(rat(-1, 3)).to_decimal(3), "-0.333");
        assert_eq!(Real::exact(rat(2, 3)).to_decimal(0), "1");
        assert_eq!(Real::exact(rat(1, 2)).to_string(), "1/2");
    }

    #[test]
    fn float_round_trip_is_exact() {
        let f = rational_to_float(&rat(3, 8), 64);
        assert_eq!(float_to_rational(&f), rat(3, 8));
    }
}
