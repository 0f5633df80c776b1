use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{check_unit_interval, Rational};
use crate::error::{Error, Result};

/// Longest preperiod + period searched before an expansion is reported as truncated.
pub const PERIOD_SEARCH_LIMIT: usize = 1 << 16;

/// A base-`b` expansion `0.d₁d₂…` with an optional suffix repeated forever.
///
/// When a repeating suffix is present, `digits` holds the preperiod followed
/// by one copy of the period, and `repeating` holds the period again; the
/// expansion is `digits` then `repeating` cycled. Without a suffix the
/// expansion continues with zeros.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitSequence {
    base: u32,
    digits: Vec<u32>,
    repeating: Option<Vec<u32>>,
    truncated: bool,
}

impl DigitSequence {
    pub fn new(base: u32, digits: Vec<u32>, repeating: Option<Vec<u32>>) -> Result<Self> {
        if base < 2 {
            return Err(Error::domain(format!("base {base} must be at least 2")));
        }
        if let Some(rep) = &repeating {
            if rep.is_empty() {
                return Err(Error::domain("repeating suffix must be nonempty"));
            }
        }
        let all = digits.iter().chain(repeating.iter().flatten());
        if let Some(d) = all.copied().find(|&d| d >= base) {
            return Err(Error::domain(format!("digit {d} out of range for base {base}")));
        }
        Ok(DigitSequence {
            base,
            digits,
            repeating,
            truncated: false,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn repeating(&self) -> Option<&[u32]> {
        self.repeating.as_deref()
    }

    /// True when the period search gave up and `digits` is a plain truncation.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// The `i`-th digit after the radix point (0-based), following the
    /// repeating suffix or trailing zeros past the stored digits.
    pub fn digit(&self, i: usize) -> u32 {
        if let Some(&d) = self.digits.get(i) {
            return d;
        }
        match &self.repeating {
            Some(rep) => rep[(i - self.digits.len()) % rep.len()],
            None => 0,
        }
    }
}

/// Base-`base` expansion of `x ∈ [0, 1]`.
///
/// Rationals have eventually periodic expansions; the preperiod is read off
/// the part of the denominator sharing primes with `base`, and the period is
/// found by waiting for the first post-preperiod remainder to recur. If
/// preperiod + period exceeds `max(count, PERIOD_SEARCH_LIMIT)` the first
/// `count` digits are returned with the truncated flag set.
///
/// Terminating expansions have a second form ending in repeated `base − 1`.
/// The form free of digit 1 is preferred when exactly one of them is; otherwise
/// the terminating form is returned, padded with zeros to `count` digits.
/// `x = 1` is `0.(base−1)(base−1)…`.
pub fn digits_base_r(x: &Rational, base: u32, count: usize) -> Result<DigitSequence> {
    digits_base_r_with_limit(x, base, count, PERIOD_SEARCH_LIMIT)
}

pub fn digits_base_r_with_limit(
    x: &Rational,
    base: u32,
    count: usize,
    search_limit: usize,
) -> Result<DigitSequence> {
    check_unit_interval(x, "x")?;
    if base < 2 {
        return Err(Error::domain(format!("base {base} must be at least 2")));
    }
    if count == 0 {
        return Err(Error::domain("digit count must be at least 1"));
    }
    let top = base - 1;

    if x.is_one() {
        return Ok(periodic(base, vec![top], vec![top]));
    }
    if x.is_zero() {
        return Ok(terminating(base, Vec::new(), count));
    }

    let den = x.denom().magnitude().clone();
    let num = x.numer().magnitude().clone();
    let b = BigUint::from(base);

    // preperiod length: smallest k with (base-smooth part of den) | base^k
    let mut coprime = den.clone();
    let mut preperiod = 0usize;
    loop {
        let g = coprime.gcd(&b);
        if g.is_one() {
            break;
        }
        while (&coprime % &g).is_zero() {
            coprime /= &g;
        }
    }
    let mut smooth = &den / &coprime;
    while !smooth.is_one() {
        let g = smooth.gcd(&b);
        smooth /= g;
        preperiod += 1;
    }

    let limit = count.max(search_limit);
    let mut div = LongDivision::new(num, den, base);
    let mut digits = Vec::with_capacity(preperiod.min(limit));
    for _ in 0..preperiod {
        if digits.len() >= limit {
            return Ok(truncated(base, digits, count));
        }
        digits.push(div.next_digit());
    }

    if coprime.is_one() {
        // terminating after `preperiod` digits, the last of which is nonzero
        let alt = alternative_form(&digits, top);
        let term_has_one = digits.contains(&1);
        let alt_has_one = alt.contains(&1);
        if term_has_one && !alt_has_one {
            return Ok(periodic(base, alt, vec![top]));
        }
        return Ok(terminating(base, digits, count));
    }

    let anchor = div.remainder();
    let mut period = Vec::new();
    loop {
        if digits.len() + period.len() >= limit {
            digits.extend(period);
            return Ok(truncated(base, digits, count));
        }
        period.push(div.next_digit());
        if div.remainder_equals(&anchor) {
            break;
        }
    }
    digits.extend_from_slice(&period);
    Ok(periodic(base, digits, period))
}

/// `d₁…d_{k−1}(d_k − 1)` followed by repeated `top`, for a terminating expansion.
fn alternative_form(digits: &[u32], top: u32) -> Vec<u32> {
    let mut alt = digits.to_vec();
    if let Some(last) = alt.last_mut() {
        *last -= 1;
    }
    alt.push(top);
    alt
}

fn periodic(base: u32, digits: Vec<u32>, period: Vec<u32>) -> DigitSequence {
    DigitSequence {
        base,
        digits,
        repeating: Some(period),
        truncated: false,
    }
}

fn terminating(base: u32, mut digits: Vec<u32>, count: usize) -> DigitSequence {
    if digits.len() < count {
        digits.resize(count, 0);
    }
    DigitSequence {
        base,
        digits,
        repeating: None,
        truncated: false,
    }
}

fn truncated(base: u32, mut digits: Vec<u32>, count: usize) -> DigitSequence {
    digits.truncate(count);
    DigitSequence {
        base,
        digits,
        repeating: None,
        truncated: true,
    }
}

/// Long division of `num/den` in a fixed base, on machine words when they fit.
enum LongDivision {
    Small { rem: u64, den: u64, base: u64 },
    Big { rem: BigUint, den: BigUint, base: BigUint },
}

impl LongDivision {
    fn new(num: BigUint, den: BigUint, base: u32) -> Self {
        let fits = den
            .to_u64()
            .filter(|d| d.checked_mul(base as u64).is_some());
        match (fits, num.to_u64()) {
            (Some(d), Some(n)) => LongDivision::Small {
                rem: n % d,
                den: d,
                base: base as u64,
            },
            _ => LongDivision::Big {
                rem: &num % &den,
                den,
                base: BigUint::from(base),
            },
        }
    }

    fn next_digit(&mut self) -> u32 {
        match self {
            LongDivision::Small { rem, den, base } => {
                let t = *rem * *base;
                *rem = t % *den;
                (t / *den) as u32
            }
            LongDivision::Big { rem, den, base } => {
                let t = &*rem * &*base;
                let (q, r) = t.div_rem(den);
                *rem = r;
                q.to_u32().expect("digit below base")
            }
        }
    }

    fn remainder(&self) -> BigUint {
        match self {
            LongDivision::Small { rem, .. } => BigUint::from(*rem),
            LongDivision::Big { rem, .. } => rem.clone(),
        }
    }

    fn remainder_equals(&self, other: &BigUint) -> bool {
        match self {
            LongDivision::Small { rem, .. } => other.to_u64() == Some(*rem),
            LongDivision::Big { rem, .. } => rem == other,
        }
    }
}

fn digits_to_uint(digits: &[u32], base: u32) -> BigUint {
    if base <= 256 {
        let bytes: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
        if bytes.is_empty() {
            return BigUint::zero();
        }
        return BigUint::from_radix_be(&bytes, base).expect("digits below base");
    }
    let b = BigUint::from(base);
    digits
        .iter()
        .fold(BigUint::zero(), |acc, &d| acc * &b + BigUint::from(d))
}

/// Exact value `Σ dᵢ·base⁻ⁱ`, with the repeating suffix summed in closed form.
pub fn value_from_digits(seq: &DigitSequence) -> Rational {
    let b = BigUint::from(seq.base);
    let scale = num_traits::pow(b.clone(), seq.digits.len());
    let head = Rational::new(
        BigInt::from(digits_to_uint(&seq.digits, seq.base)),
        BigInt::from(scale.clone()),
    );
    match &seq.repeating {
        None => head,
        Some(rep) => {
            let block = num_traits::pow(b, rep.len()) - BigUint::one();
            let tail = Rational::new(
                BigInt::from(digits_to_uint(rep, seq.base)),
                BigInt::from(block * scale),
            );
            head + tail
        }
    }
}
