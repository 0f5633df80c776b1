//! Exact rational arithmetic, base-r digit expansions and controlled-precision
//! logarithms.
//!
//! Every interval endpoint, scale and staircase value in this crate is a
//! [`Rational`]. Quantities that are irrational in general (logarithms,
//! fractional powers) are carried as a [`Real`], which stays exact whenever
//! the result can be recognised as a rational number and otherwise holds a
//! binary float with a tracked decimal precision.

mod digits;
mod real;

pub use digits::{digits_base_r, digits_base_r_with_limit, value_from_digits, DigitSequence};
pub use real::{
    float_to_rational, ln_rational, log_ratio, pow_real, rational_to_float, Float, Real,
    DEFAULT_PRECISION,
};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// `n/d` as a [`Rational`]. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for an integer exponent of either sign.
pub fn rational_powi(base: &Rational, exp: i64) -> Rational {
    let mag = exp.unsigned_abs();
    let num = Pow::pow(base.numer(), mag);
    let den = Pow::pow(base.denom(), mag);
    if exp >= 0 {
        Rational::new(num, den)
    } else {
        Rational::new(den, num)
    }
}

/// Formats as `num/den`, including integers (`1/1`, `0/1`).
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `a/b`, an integer, or a decimal with optional exponent
/// (`0.001`, `-2.5e-3`). Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(text.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i64;
    let mut value = Rational::from_integer(digits) * rational_powi(&int(10), scale);
    if negative {
        value = -value;
    }
    Ok(value)
}

fn exact_root(n: &BigUint, k: u32) -> Option<BigUint> {
    if n.is_one() || n.is_zero() {
        return Some(n.clone());
    }
    let root = n.nth_root(k);
    (Pow::pow(&root, k) == *n).then_some(root)
}

/// Natural logarithm of a positive integer as `f64`, valid beyond the `f64` range.
fn approx_ln_uint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 960 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn approx_ln(x: &Rational) -> f64 {
    approx_ln_uint(x.numer().magnitude()) - approx_ln_uint(x.denom().magnitude())
}

/// The rational `k` with `a = b^k`, if one exists. Requires `a, b > 0`, `b != 1`.
///
/// If `a = g^ea` and `b = g^eb` for a common primitive `g`, then `k = ea/eb`
/// and `|eb|` is bounded by the bit length of `b`. Candidates are the
/// continued-fraction convergents of the floating ratio up to that bound, each
/// confirmed in exact arithmetic.
pub fn exact_log_ratio(a: &Rational, b: &Rational) -> Option<Rational> {
    if a.is_one() {
        return Some(Rational::zero());
    }
    let q = approx_ln(a) / approx_ln(b);
    if !q.is_finite() {
        return None;
    }
    let max_den = b.numer().bits().max(b.denom().bits()) as i64 + 1;
    let tol = 1e-9 * q.abs().max(1.0);

    // convergents h/k of the continued fraction of q
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = q;
    for _ in 0..64 {
        let term = rest.floor();
        if term.abs() > 1e15 {
            break;
        }
        let t = term as i64;
        let h = t.checked_mul(h1)?.checked_add(h0)?;
        let k = t.checked_mul(k1)?.checked_add(k0)?;
        if k > max_den {
            break;
        }
        if (h as f64 / k as f64 - q).abs() <= tol {
            let cand = rat(h, k);
            if pow_rational_exact(b, &cand).as_ref() == Some(a) {
                return Some(cand);
            }
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = rest - term;
        if frac.abs() < 1e-12 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// `base^exp` when the result is rational; `None` otherwise. Requires `base > 0`.
pub fn pow_rational_exact(base: &Rational, exp: &Rational) -> Option<Rational> {
    if exp.is_zero() || base.is_one() {
        return Some(Rational::one());
    }
    let k = exp.denom().to_u32()?;
    let m = exp.numer().to_i64()?;
    let rn = exact_root(base.numer().magnitude(), k)?;
    let rd = exact_root(base.denom().magnitude(), k)?;
    let root = Rational::new(BigInt::from(rn), BigInt::from(rd));
    Some(rational_powi(&root, m))
}

pub(crate) fn check_unit_interval(x: &Rational, what: &str) -> Result<()> {
    if x.is_negative() || x > &Rational::one() {
        return Err(Error::domain(format!(
            "{what} = {} lies outside [0, 1]",
            format_rational(x)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("6/18").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("0.001").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("-2.5").unwrap(), rat(-5, 2));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_integers_with_denominator() {
        assert_eq!(format_rational(&int(1)), "1/1");
        assert_eq!(format_rational(&int(0)), "0/1");
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
    }

    #[test]
    fn exact_log_ratio_detects_rational_exponents() {
        assert_eq!(exact_log_ratio(&int(3), &int(9)), Some(rat(1, 2)));
        assert_eq!(exact_log_ratio(&int(5), &int(5)), Some(int(1)));
        assert_eq!(exact_log_ratio(&rat(1, 8), &int(4)), Some(rat(-3, 2)));
        assert_eq!(exact_log_ratio(&int(1), &int(7)), Some(int(0)));
        assert_eq!(exact_log_ratio(&rat(4, 9), &rat(27, 8)), Some(rat(-2, 3)));
        assert_eq!(exact_log_ratio(&int(2), &int(3)), None);
        assert_eq!(exact_log_ratio(&int(6), &int(36)), Some(rat(1, 2)));
    }

    #[test]
    fn exact_powers() {
        assert_eq!(pow_rational_exact(&rat(1, 9), &rat(1, 2)), Some(rat(1, 3)));
        assert_eq!(pow_rational_exact(&int(8), &rat(-2, 3)), Some(rat(1, 4)));
        assert_eq!(pow_rational_exact(&int(2), &rat(1, 2)), None);
        assert_eq!(pow_rational_exact(&int(2), &int(0)), Some(int(1)));
    }
}
