//! The Cantor function (devil's staircase) and its (p, r) generalisation.
//!
//! A point's base-`r` address is read through the slot pattern: the `i`-th
//! retained branch index becomes the `i`-th base-`p` digit of the value.
//! A point in a gap takes the value shared by the gap's two endpoints.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cantor_set::{retained_interval, IfsSpec, IntervalKind, RationalInterval, Step, Walker};
use crate::error::{Error, Result};
use crate::numeric::{
    check_unit_interval, digits_base_r, format_rational, rational_powi, value_from_digits,
    DigitSequence, Rational,
};

/// Default number of levels followed before giving up on an exact value.
pub const DEFAULT_MAX_LEVEL: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaircaseValue {
    pub x: Rational,
    /// The staircase value, or a lower bound within `p^-level_resolved` when inexact.
    pub y: Rational,
    pub exact: bool,
    pub level_resolved: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StaircaseRow {
    pub x: String,
    pub y: String,
    pub exact: bool,
    pub level: usize,
}

impl From<&StaircaseValue> for StaircaseRow {
    fn from(v: &StaircaseValue) -> Self {
        StaircaseRow {
            x: format_rational(&v.x),
            y: format_rational(&v.y),
            exact: v.exact,
            level: v.level_resolved,
        }
    }
}

fn pow_int(base: u32, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

pub fn cantor_function(spec: &IfsSpec, x: &Rational, max_level: usize) -> Result<StaircaseValue> {
    check_unit_interval(x, "x")?;
    let p = spec.p();
    let mut walker = Walker::new(spec, x);
    // value digits so far, as a numerator over p^level
    let mut acc = BigInt::zero();
    let mut seen: HashMap<BigInt, (usize, BigInt)> = HashMap::new();
    seen.insert(walker.offset.clone(), (0, BigInt::zero()));

    let resolved = |y: Rational, level: usize| StaircaseValue {
        x: x.clone(),
        y,
        exact: true,
        level_resolved: level,
    };

    for _ in 0..max_level {
        match walker.step() {
            Step::Branch(b) => {
                acc = acc * p + b;
                let level = walker.level;
                if let Some((start, acc_start)) = seen.get(&walker.offset) {
                    // digits start+1..=level repeat forever
                    let period = level - start;
                    let block = &acc - acc_start * pow_int(p, period);
                    let head = Rational::new(acc_start.clone(), pow_int(p, *start));
                    let tail = Rational::new(
                        block,
                        (pow_int(p, period) - 1) * pow_int(p, *start),
                    );
                    return Ok(resolved(head + tail, level));
                }
                seen.insert(walker.offset.clone(), (level, acc.clone()));
            }
            Step::Boundary(slot) | Step::Gap(slot) => {
                let num = acc * p + spec.keeps_before(slot);
                let y = Rational::new(num, pow_int(p, walker.level));
                return Ok(resolved(y, walker.level));
            }
        }
    }
    Ok(StaircaseValue {
        x: x.clone(),
        y: Rational::new(acc, pow_int(p, walker.level)),
        exact: false,
        level_resolved: walker.level,
    })
}

/// Staircase values on the grid `0, 1/(count−1), …, 1`.
pub fn sample_grid(spec: &IfsSpec, count: usize, max_level: usize) -> Result<Vec<StaircaseValue>> {
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let steps = (count - 1).max(1) as i64;
    (0..count as i64)
        .map(|i| cantor_function(spec, &Rational::new(i.into(), steps.into()), max_level))
        .collect()
}

/// Rise of the staircase across the `j`-th (1-based) retained interval at level `k`.
pub fn staircase_increment(spec: &IfsSpec, k: usize, j: u64) -> Result<Rational> {
    if k < 1 {
        return Err(Error::domain("level k must be at least 1"));
    }
    if j < 1 {
        return Err(Error::domain("interval index j is 1-based"));
    }
    let f = retained_interval(spec, k, j - 1)?;
    let hi = cantor_function(spec, &f.hi, k + 2)?;
    let lo = cantor_function(spec, &f.lo, k + 2)?;
    debug_assert!(hi.exact && lo.exact);
    Ok(hi.y - lo.y)
}

/// Smallest `m` with `den | base^m`, if any.
fn terminating_length(den: &BigUint, base: u32) -> Option<usize> {
    let b = BigUint::from(base);
    let mut rest = den.clone();
    let mut m = 0;
    while !rest.is_one() {
        let g = rest.gcd(&b);
        if g.is_one() {
            return None;
        }
        rest /= g;
        m += 1;
    }
    Some(m)
}

/// Preimage of `y` under the staircase.
///
/// Values with a terminating base-`p` expansion are attained on a whole gap
/// (returned closed, endpoints included); other values have a single
/// preimage point. If that point's address is not periodic within
/// `max_level` digits, the level-`max_level` retained interval containing it
/// is returned instead.
pub fn inverse_staircase(spec: &IfsSpec, y: &Rational, max_level: usize) -> Result<RationalInterval> {
    check_unit_interval(y, "y")?;
    if y.is_zero() || y.is_one() {
        return Ok(RationalInterval::point(y.clone(), IntervalKind::Retained));
    }
    let p = spec.p();
    let r = spec.r();
    let keeps = spec.keep_slots();

    if let Some(m) = terminating_length(y.denom().magnitude(), p) {
        let scaled = y * Rational::from_integer(pow_int(p, m));
        let mut c = scaled.to_integer();
        let mut digits = vec![0u32; m];
        for d in digits.iter_mut().rev() {
            let (q, rem) = c.div_mod_floor(&BigInt::from(p));
            *d = u32::try_from(&rem).expect("digit below p");
            c = q;
        }
        let last = digits[m - 1];
        let left = digits[..m - 1]
            .iter()
            .fold(BigInt::zero(), |acc, &d| acc * r + keeps[d as usize]);
        let base = left * r;
        let den = pow_int(r, m);
        let lo = Rational::new(&base + keeps[last as usize - 1] + 1u32, den.clone());
        let hi = Rational::new(&base + keeps[last as usize], den);
        return Ok(RationalInterval::new(lo, hi, IntervalKind::Gap));
    }

    let count = max_level.max(1);
    let seq = digits_base_r(y, p, count)?;
    let map = |ds: &[u32]| ds.iter().map(|&d| keeps[d as usize]).collect::<Vec<_>>();
    if !seq.is_truncated() {
        let mapped = DigitSequence::new(r, map(seq.digits()), seq.repeating().map(map))?;
        return Ok(RationalInterval::point(
            value_from_digits(&mapped),
            IntervalKind::Retained,
        ));
    }
    let mapped = DigitSequence::new(r, map(seq.digits()), None)?;
    let lo = value_from_digits(&mapped);
    let width = rational_powi(&Rational::from_integer(r.into()), -(seq.digits().len() as i64));
    Ok(RationalInterval::new(
        lo.clone(),
        lo + width,
        IntervalKind::Retained,
    ))
}
