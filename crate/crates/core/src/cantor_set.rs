//! Level-n approximations of (p, q, r) Cantor sets with exact endpoints.
//!
//! At every step each retained closed interval is cut into `r` slots of equal
//! length; the `p` slots marked [`Slot::Keep`] are retained and the `q` slots
//! marked [`Slot::Gap`] are deleted. Adjacent deleted slots merge into a
//! single gap, so each parent contributes `p − 1` gaps and the cumulative gap
//! count at level `n` is `pⁿ − 1`.

use std::collections::HashSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    check_unit_interval, log_ratio, pow_rational_exact, pow_real, rational_powi,
    Rational, Real, DEFAULT_PRECISION,
};

/// Largest number of retained intervals a single construction may produce.
pub const DEFAULT_INTERVAL_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Keep,
    Gap,
}

/// The similitude family: `p` retained slots and `q` deleted slots out of `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct IfsSpec {
    p: u32,
    q: u32,
    r: u32,
    pattern: Vec<Slot>,
    keep_slots: Vec<u32>,
}

/// JSON shape of an [`IfsSpec`]: `{"p":2,"q":1,"r":3,"gap_pattern":["keep","gap","keep"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecDocument {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_pattern: Option<Vec<Slot>>,
}

impl TryFrom<SpecDocument> for IfsSpec {
    type Error = Error;

    fn try_from(doc: SpecDocument) -> Result<Self> {
        make_spec(doc.p, doc.q, doc.r, doc.gap_pattern)
    }
}

impl From<IfsSpec> for SpecDocument {
    fn from(spec: IfsSpec) -> Self {
        SpecDocument {
            p: spec.p,
            q: spec.q,
            r: spec.r,
            gap_pattern: Some(spec.pattern),
        }
    }
}

/// Validates `(p, q, r)` and the slot pattern; without a pattern the `q`
/// deletions are spread over the `p − 1` spaces between retained slots,
/// one per space from the left when `q ≤ p − 1` (the triadic pattern is
/// keep, gap, keep).
pub fn make_spec(p: u32, q: u32, r: u32, gap_pattern: Option<Vec<Slot>>) -> Result<IfsSpec> {
    if p < 1 || q < 1 {
        return Err(Error::spec("p and q must both be at least 1"));
    }
    if p.checked_add(q) != Some(r) {
        return Err(Error::spec(format!("p+q must equal r (got p={p}, q={q}, r={r})")));
    }
    if p < 2 {
        return Err(Error::spec(
            "p must be at least 2 to retain both the first and last slot",
        ));
    }
    let pattern = match gap_pattern {
        Some(pattern) => pattern,
        None => default_pattern(p, q),
    };
    if pattern.len() != r as usize {
        return Err(Error::spec(format!(
            "gap pattern has {} slots, expected r = {r}",
            pattern.len()
        )));
    }
    let keep_slots: Vec<u32> = pattern
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Slot::Keep)
        .map(|(i, _)| i as u32)
        .collect();
    if keep_slots.len() != p as usize {
        return Err(Error::spec(format!(
            "gap pattern retains {} slots, expected p = {p}",
            keep_slots.len()
        )));
    }
    if pattern[0] != Slot::Keep || pattern[pattern.len() - 1] != Slot::Keep {
        return Err(Error::spec("first and last slots must be retained"));
    }
    Ok(IfsSpec {
        p,
        q,
        r,
        pattern,
        keep_slots,
    })
}

fn default_pattern(p: u32, q: u32) -> Vec<Slot> {
    let spaces = p - 1;
    let (each, extra) = (q / spaces, q % spaces);
    let mut pattern = vec![Slot::Keep];
    for i in 0..spaces {
        let run = each + u32::from(i < extra);
        pattern.extend(std::iter::repeat_n(Slot::Gap, run as usize));
        pattern.push(Slot::Keep);
    }
    pattern
}

impl IfsSpec {
    /// The middle-thirds set: `f₁(x) = x/3`, `f₂(x) = (x + 2)/3`.
    pub fn triadic() -> Self {
        make_spec(2, 1, 3, None).expect("triadic spec is valid")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn pattern(&self) -> &[Slot] {
        &self.pattern
    }

    /// Slot positions of the retained branches, in branch order.
    pub fn keep_slots(&self) -> &[u32] {
        &self.keep_slots
    }

    pub fn is_keep(&self, slot: u32) -> bool {
        self.pattern.get(slot as usize) == Some(&Slot::Keep)
    }

    /// Branch index of a retained slot.
    pub fn branch_of(&self, slot: u32) -> Option<u32> {
        self.keep_slots.binary_search(&slot).ok().map(|b| b as u32)
    }

    /// Number of retained slots strictly left of `slot` (`slot` may equal `r`).
    pub fn keeps_before(&self, slot: u32) -> u32 {
        self.keep_slots.partition_point(|&k| k < slot) as u32
    }

    /// The maximal run `[a, b]` of deleted slots containing `slot`.
    pub(crate) fn gap_run(&self, slot: u32) -> (u32, u32) {
        debug_assert!(!self.is_keep(slot));
        let mut a = slot;
        while a > 0 && !self.is_keep(a - 1) {
            a -= 1;
        }
        let mut b = slot;
        while b + 1 < self.r && !self.is_keep(b + 1) {
            b += 1;
        }
        (a, b)
    }

    /// Maximal runs of deleted slots, left to right.
    pub(crate) fn gap_runs(&self) -> Vec<(u32, u32)> {
        self.keep_slots
            .windows(2)
            .filter(|w| w[1] > w[0] + 1)
            .map(|w| (w[0] + 1, w[1] - 1))
            .collect()
    }

    /// `length^s` with `s` the similarity dimension. Exact whenever
    /// `length = r^k` with `p^k` rational, using `r^s = p`.
    pub fn dimension_power(&self, length: &Rational, precision: u32) -> Result<Real> {
        let r = Rational::from_integer(self.r.into());
        let p = Rational::from_integer(self.p.into());
        if let Real::Exact(k) = log_ratio(length, &r, precision)? {
            if let Some(v) = pow_rational_exact(&p, &k) {
                return Ok(Real::Exact(v));
            }
        }
        let s = hausdorff_dimension_with(self, precision + 4);
        pow_real(length, &s, precision)
    }
}

impl fmt::Display for IfsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={}, r={}) ", self.p, self.q, self.r)?;
        for s in &self.pattern {
            f.write_str(match s {
                Slot::Keep => "K",
                Slot::Gap => "_",
            })?;
        }
        Ok(())
    }
}

/// `s = log p / log r` at the default precision.
pub fn hausdorff_dimension(spec: &IfsSpec) -> Real {
    hausdorff_dimension_with(spec, DEFAULT_PRECISION)
}

pub fn hausdorff_dimension_with(spec: &IfsSpec, precision: u32) -> Real {
    let p = Rational::from_integer(spec.p.into());
    let r = Rational::from_integer(spec.r.into());
    log_ratio(&p, &r, precision).expect("p ≥ 2 and r > p keep the logarithms in domain")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Retained,
    Gap,
}

/// A closed interval with exact endpoints. For gaps the deleted open
/// interval is the interior.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub kind: IntervalKind,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational, kind: IntervalKind) -> Self {
        debug_assert!(lo <= hi);
        RationalInterval { lo, hi, kind }
    }

    pub fn point(x: Rational, kind: IntervalKind) -> Self {
        RationalInterval {
            lo: x.clone(),
            hi: x,
            kind,
        }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interior(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &RationalInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Level-`n` retained intervals `F_{nk}` and the cumulative gaps `I_{nk}`.
#[derive(Debug, Clone)]
pub struct CantorApproximation {
    pub spec: IfsSpec,
    pub level: usize,
    pub retained: Vec<RationalInterval>,
    pub gaps: Vec<RationalInterval>,
}

pub(crate) fn check_interval_count(spec: &IfsSpec, n: usize, cap: u64) -> Result<u64> {
    let count = (spec.p as u64).checked_pow(n as u32).filter(|c| *c <= cap);
    count.ok_or_else(|| Error::ResourceCap {
        what: "level construction",
        requested: format!("{}^{} intervals", spec.p, n),
        cap,
    })
}

pub fn level(spec: &IfsSpec, n: usize) -> Result<CantorApproximation> {
    level_with_cap(spec, n, DEFAULT_INTERVAL_CAP)
}

pub fn level_with_cap(spec: &IfsSpec, n: usize, cap: u64) -> Result<CantorApproximation> {
    check_interval_count(spec, n, cap)?;
    let r = BigUint::from(spec.r);
    let runs = spec.gap_runs();

    // left endpoints as numerators over r^k
    let mut lefts = vec![BigUint::zero()];
    let mut gaps = Vec::new();
    for k in 1..=n {
        let den = num_traits::pow(r.clone(), k);
        let mut next = Vec::with_capacity(lefts.len() * spec.p as usize);
        for left in &lefts {
            let base = left * &r;
            for &s in &spec.keep_slots {
                next.push(&base + s);
            }
            for &(a, b) in &runs {
                gaps.push(RationalInterval::new(
                    ratio(&base + a, &den),
                    ratio(&base + b + 1u32, &den),
                    IntervalKind::Gap,
                ));
            }
        }
        lefts = next;
    }

    let den = num_traits::pow(r, n);
    let retained = lefts
        .into_iter()
        .map(|left| {
            let hi = &left + 1u32;
            RationalInterval::new(ratio(left, &den), ratio(hi, &den), IntervalKind::Retained)
        })
        .collect();
    gaps.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(CantorApproximation {
        spec: spec.clone(),
        level: n,
        retained,
        gaps,
    })
}

fn ratio(num: BigUint, den: &BigUint) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den.clone()))
}

/// The `index`-th (0-based) retained interval at level `k`, without building the level.
pub fn retained_interval(spec: &IfsSpec, k: usize, index: u64) -> Result<RationalInterval> {
    let count = (spec.p as u64).checked_pow(k as u32);
    if count.is_none_or(|c| index >= c) {
        return Err(Error::domain(format!(
            "interval index {index} out of range at level {k}"
        )));
    }
    let r = BigUint::from(spec.r);
    let mut digits = Vec::with_capacity(k);
    let mut j = index;
    for _ in 0..k {
        digits.push((j % spec.p as u64) as usize);
        j /= spec.p as u64;
    }
    let left = digits
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, &d| acc * &r + spec.keep_slots[d]);
    let den = num_traits::pow(r, k);
    let hi = &left + 1u32;
    Ok(RationalInterval::new(
        ratio(left, &den),
        ratio(hi, &den),
        IntervalKind::Retained,
    ))
}

/// One step of locating a point in the construction tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Step {
    /// The point lies in the interior of a retained slot (the branch index).
    Branch(u32),
    /// The point sits on the left edge of `slot` (`slot == r` for the right end).
    Boundary(u32),
    /// The point lies in the interior of a deleted slot.
    Gap(u32),
}

/// Walks a point of `[0, 1]` down the construction tree, one level per step.
///
/// `offset / den` is the point's position inside the current retained
/// interval, rescaled to `[0, 1]`; `den` is the denominator of the starting
/// point and never changes. `left` is that interval's left endpoint numerator
/// over `r^level`.
#[derive(Debug, Clone)]
pub(crate) struct Walker<'a> {
    spec: &'a IfsSpec,
    pub offset: BigInt,
    den: BigInt,
    pub left: BigInt,
    pub level: usize,
}

impl<'a> Walker<'a> {
    pub fn new(spec: &'a IfsSpec, x: &Rational) -> Self {
        Walker {
            spec,
            offset: x.numer().clone(),
            den: x.denom().clone(),
            left: BigInt::zero(),
            level: 0,
        }
    }

    /// Descends one level. After a [`Step::Branch`] the walker is inside the
    /// chosen child; otherwise it stays on the level where the step resolved.
    pub fn step(&mut self) -> Step {
        let (slot, frac) = (&self.offset * self.spec.r).div_mod_floor(&self.den);
        let slot = slot.to_u32().expect("slot index fits in u32");
        self.level += 1;
        let parent = std::mem::take(&mut self.left);
        self.left = parent * self.spec.r + slot;
        if frac.is_zero() {
            return Step::Boundary(slot);
        }
        if !self.spec.is_keep(slot) {
            return Step::Gap(slot);
        }
        self.offset = frac;
        Step::Branch(self.spec.branch_of(slot).expect("retained slot"))
    }

    /// Left numerator of the parent interval at the current level, i.e.
    /// the current left minus the slot just taken.
    pub fn parent_base(&self, slot: u32) -> BigInt {
        &self.left - slot
    }

    pub fn denominator(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.spec.r), self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    InC,
    /// The first (hence largest) gap containing the point in its interior.
    InGapAt { level: usize, gap: RationalInterval },
    /// No decision within the examined levels.
    UndecidedAt(usize),
}

/// Classifies `x` against the limit set by following its base-`r` address.
///
/// Boundary points of gaps are retained endpoints at every level and count as
/// members. A point whose address becomes periodic inside retained branches
/// is a member; if neither a gap nor a period is found within `max_level`
/// levels the result is undecided.
pub fn membership(spec: &IfsSpec, x: &Rational, max_level: usize) -> Result<Membership> {
    check_unit_interval(x, "x")?;
    let mut walker = Walker::new(spec, x);
    let mut seen = HashSet::new();
    seen.insert(walker.offset.clone());
    for _ in 0..max_level {
        match walker.step() {
            Step::Branch(_) => {
                if !seen.insert(walker.offset.clone()) {
                    return Ok(Membership::InC);
                }
            }
            Step::Boundary(slot) => {
                let left_keep = slot > 0 && spec.is_keep(slot - 1);
                if spec.is_keep(slot) || left_keep || slot == spec.r {
                    return Ok(Membership::InC);
                }
                return Ok(gap_at(spec, &walker, slot));
            }
            Step::Gap(slot) => return Ok(gap_at(spec, &walker, slot)),
        }
    }
    Ok(Membership::UndecidedAt(max_level))
}

/// The first `depth` branch indices of a point of the limit set.
///
/// A point shared by two adjacent retained intervals takes the right one;
/// an endpoint continues with its extreme branch forever.
pub fn cantor_address(spec: &IfsSpec, x: &Rational, depth: usize) -> Result<Vec<u32>> {
    check_unit_interval(x, "x")?;
    let not_member = || {
        Error::domain(format!(
            "{} lies in a gap of the construction",
            crate::numeric::format_rational(x)
        ))
    };
    let mut walker = Walker::new(spec, x);
    let mut address = Vec::with_capacity(depth);
    while address.len() < depth {
        match walker.step() {
            Step::Branch(b) => address.push(b),
            Step::Boundary(slot) => {
                let (branch, fill) = if slot < spec.r && spec.is_keep(slot) {
                    (spec.branch_of(slot), 0)
                } else if slot > 0 && spec.is_keep(slot - 1) {
                    (spec.branch_of(slot - 1), spec.p - 1)
                } else {
                    return Err(not_member());
                };
                address.push(branch.expect("retained slot"));
                address.resize(depth, fill);
            }
            Step::Gap(_) => return Err(not_member()),
        }
    }
    Ok(address)
}

/// Zero-based index of the retained interval with the given address.
pub fn address_index(spec: &IfsSpec, address: &[u32]) -> u64 {
    address
        .iter()
        .fold(0u64, |acc, &b| acc * spec.p as u64 + b as u64)
}

fn gap_at(spec: &IfsSpec, walker: &Walker<'_>, slot: u32) -> Membership {
    let (a, b) = spec.gap_run(slot);
    let base = walker.parent_base(slot);
    let den = walker.denominator();
    let gap = RationalInterval::new(
        Rational::new(&base + a, den.clone()),
        Rational::new(&base + b + 1u32, den),
        IntervalKind::Gap,
    );
    Membership::InGapAt {
        level: walker.level,
        gap,
    }
}

/// Lebesgue measure of the level-`n` approximation, `(p/r)ⁿ`.
pub fn retained_length(spec: &IfsSpec, n: usize) -> Rational {
    rational_powi(
        &Rational::new(spec.p.into(), spec.r.into()),
        n as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::numeric::{int, parse_rational, rat};
    use proptest::prelude::*;

    fn iv(lo: Rational, hi: Rational, kind: IntervalKind) -> RationalInterval {
        RationalInterval::new(lo, hi, kind)
    }

    #[test]
    fn addresses() {
        let t = IfsSpec::triadic();
        assert_eq!(cantor_address(&t, &rat(1, 4), 4).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(cantor_address(&t, &rat(1, 3), 3).unwrap(), vec![0, 1, 1]);
        assert_eq!(cantor_address(&t, &rat(2, 3), 3).unwrap(), vec![1, 0, 0]);
        assert_eq!(cantor_address(&t, &int(1), 2).unwrap(), vec![1, 1]);
        assert!(cantor_address(&t, &rat(1, 2), 3).is_err());
        let wide = make_spec(4, 1, 5, None).unwrap();
        // 3/5 is shared by two adjacent retained intervals
        assert_eq!(cantor_address(&wide, &rat(3, 5), 2).unwrap(), vec![2, 0]);
        assert_eq!(address_index(&t, &[1, 0, 1]), 5);
        for k in 1..=4 {
            for j in 0..(1u64 << k) {
                let f = retained_interval(&t, k, j).unwrap();
                let a = cantor_address(&t, &f.lo, k).unwrap();
                assert_eq!(address_index(&t, &a), j);
            }
        }
    }

    #[test]
    fn triadic_default_pattern() {
        let t = IfsSpec::triadic();
        assert_eq!(t.pattern(), &[Slot::Keep, Slot::Gap, Slot::Keep]);
        assert_eq!(t.keep_slots(), &[0, 2]);
    }

    #[test]
    fn spec_validation() {
        assert!(make_spec(1, 1, 2, None).is_err());
        assert!(make_spec(1, 1, 2, Some(vec![Slot::Keep, Slot::Gap])).is_err());
        let err = make_spec(2, 2, 3, None).unwrap_err();
        assert!(err.to_string().contains("p+q must equal r"));
        let quintic = make_spec(
            3,
            2,
            5,
            Some(vec![Slot::Keep, Slot::Gap, Slot::Keep, Slot::Gap, Slot::Keep]),
        )
        .unwrap();
        assert_eq!(quintic.keep_slots(), &[0, 2, 4]);
        assert!(make_spec(2, 1, 3, Some(vec![Slot::Gap, Slot::Keep, Slot::Keep])).is_err());
        assert!(make_spec(2, 1, 3, Some(vec![Slot::Keep, Slot::Keep, Slot::Gap])).is_err());
        assert!(make_spec(2, 1, 3, Some(vec![Slot::Keep, Slot::Gap])).is_err());
        assert!(make_spec(2, 1, 3, Some(vec![Slot::Keep, Slot::Keep, Slot::Keep])).is_err());
    }

    #[test]
    fn default_patterns_spread_gaps() {
        use Slot::{Gap as G, Keep as K};
        assert_eq!(make_spec(3, 2, 5, None).unwrap().pattern(), &[K, G, K, G, K]);
        assert_eq!(make_spec(4, 1, 5, None).unwrap().pattern(), &[K, G, K, K, K]);
        assert_eq!(make_spec(2, 2, 4, None).unwrap().pattern(), &[K, G, G, K]);
        assert_eq!(make_spec(3, 3, 6, None).unwrap().pattern(), &[K, G, G, K, G, K]);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"p":2,"q":1,"r":3,"gap_pattern":["keep","gap","keep"]}"#;
        let spec: IfsSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec, IfsSpec::triadic());
        assert_eq!(serde_json::to_string(&spec).unwrap(), text);
        let no_pattern: IfsSpec = serde_json::from_str(r#"{"p":2,"q":1,"r":3}"#).unwrap();
        assert_eq!(no_pattern, IfsSpec::triadic());
        assert!(serde_json::from_str::<IfsSpec>(r#"{"p":2,"q":2,"r":3}"#).is_err());
    }

    #[test]
    fn dimensions() {
        let s = hausdorff_dimension(&IfsSpec::triadic());
        let reference =
            parse_rational("0.63092975357145743709952711434276085429958564013188").unwrap();
        assert!(s.abs_diff(&Real::exact(reference)) <= parse_rational("1e-30").unwrap());
        let quintic = make_spec(3, 2, 5, None).unwrap();
        let s = hausdorff_dimension(&quintic);
        // mpmath: log 3 / log 5
        let reference =
            parse_rational("0.68260619448598529513456635927105225302466939987317").unwrap();
        assert!(s.abs_diff(&Real::exact(reference)) <= parse_rational("1e-30").unwrap());
        // log 2 / log 4 is exactly 1/2
        let s = hausdorff_dimension(&make_spec(2, 2, 4, None).unwrap());
        assert_eq!(s.as_rational(), Some(&rat(1, 2)));
    }

    #[test]
    fn dimension_power_is_symbolic() {
        let t = IfsSpec::triadic();
        assert_eq!(t.dimension_power(&rat(1, 9), 30).unwrap().as_rational(), Some(&rat(1, 4)));
        assert_eq!(t.dimension_power(&int(1), 30).unwrap().as_rational(), Some(&int(1)));
        let approx = t.dimension_power(&rat(1, 2), 30).unwrap();
        assert!(!approx.is_exact());
    }

    #[test]
    fn level_one_and_two() {
        let t = IfsSpec::triadic();
        let l1 = level(&t, 1).unwrap();
        assert_eq!(
            l1.retained,
            vec![
                iv(int(0), rat(1, 3), IntervalKind::Retained),
                iv(rat(2, 3), int(1), IntervalKind::Retained)
            ]
        );
        assert_eq!(l1.gaps, vec![iv(rat(1, 3), rat(2, 3), IntervalKind::Gap)]);
        let l2 = level(&t, 2).unwrap();
        assert_eq!(
            l2.gaps,
            vec![
                iv(rat(1, 9), rat(2, 9), IntervalKind::Gap),
                iv(rat(3, 9), rat(6, 9), IntervalKind::Gap),
                iv(rat(7, 9), rat(8, 9), IntervalKind::Gap),
            ]
        );
        assert_eq!(l2.retained.len(), 4);
        let l0 = level(&t, 0).unwrap();
        assert_eq!(l0.retained, vec![iv(int(0), int(1), IntervalKind::Retained)]);
        assert!(l0.gaps.is_empty());
    }

    #[test]
    fn resource_cap() {
        let t = IfsSpec::triadic();
        assert!(matches!(level_with_cap(&t, 5, 16), Err(Error::ResourceCap { .. })));
        assert!(level_with_cap(&t, 4, 16).is_ok());
        assert!(matches!(level(&t, 100), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn merged_gaps_for_adjacent_deletions() {
        let spec = make_spec(2, 2, 4, None).unwrap();
        let l1 = level(&spec, 1).unwrap();
        assert_eq!(l1.gaps, vec![iv(rat(1, 4), rat(3, 4), IntervalKind::Gap)]);
        assert_eq!(
            membership(&spec, &rat(1, 2), 10).unwrap(),
            Membership::InGapAt {
                level: 1,
                gap: iv(rat(1, 4), rat(3, 4), IntervalKind::Gap)
            }
        );
    }

    #[test]
    fn membership_examples() {
        let t = IfsSpec::triadic();
        assert_eq!(membership(&t, &rat(1, 4), 64).unwrap(), Membership::InC);
        assert_eq!(
            membership(&t, &rat(1, 2), 64).unwrap(),
            Membership::InGapAt {
                level: 1,
                gap: iv(rat(1, 3), rat(2, 3), IntervalKind::Gap)
            }
        );
        assert_eq!(membership(&t, &int(0), 64).unwrap(), Membership::InC);
        assert_eq!(membership(&t, &int(1), 64).unwrap(), Membership::InC);
        assert_eq!(membership(&t, &rat(1, 3), 64).unwrap(), Membership::InC);
        assert_eq!(membership(&t, &rat(7, 9), 64).unwrap(), Membership::InC);
        assert_eq!(
            membership(&t, &rat(4, 27), 64).unwrap(),
            Membership::InGapAt {
                level: 2,
                gap: iv(rat(1, 9), rat(2, 9), IntervalKind::Gap)
            }
        );
        // 1/4 has period 2 in base 3; one level is not enough to see it
        assert_eq!(membership(&t, &rat(1, 4), 1).unwrap(), Membership::UndecidedAt(1));
        assert!(membership(&t, &rat(3, 2), 4).is_err());
    }

    #[test]
    fn indexed_intervals_match_construction() {
        let spec = make_spec(3, 2, 5, None).unwrap();
        let l3 = level(&spec, 3).unwrap();
        for (j, f) in l3.retained.iter().enumerate() {
            assert_eq!(&retained_interval(&spec, 3, j as u64).unwrap(), f);
        }
        assert!(retained_interval(&spec, 3, 27).is_err());
    }

    #[test]
    fn lengths_and_covering() {
        for spec in [IfsSpec::triadic(), make_spec(3, 2, 5, None).unwrap()] {
            for n in 0..=6 {
                let l = level(&spec, n).unwrap();
                let count = (spec.p() as usize).pow(n as u32);
                assert_eq!(l.retained.len(), count);
                assert_eq!(l.gaps.len(), count - 1);
                let side = rational_powi(&rat(1, spec.r() as i64), n as i64);
                assert!(l.retained.iter().all(|f| f.length() == side));
                let total: Rational = l.retained.iter().map(|f| f.length()).sum();
                assert_eq!(total, retained_length(&spec, n));
                // retained and gaps tile [0,1]
                let mut all: Vec<_> = l.retained.iter().chain(&l.gaps).collect();
                all.sort_by(|a, b| a.lo.cmp(&b.lo));
                assert_eq!(all[0].lo, int(0));
                assert!(all[all.len() - 1].hi.is_one());
                assert!(all.windows(2).all(|w| w[0].hi == w[1].lo));
            }
        }
    }

    #[test]
    fn lebesgue_measure_shrinks_through_level_twelve() {
        let t = IfsSpec::triadic();
        for n in 0..=12 {
            let total: Rational = level(&t, n).unwrap().retained.iter().map(|f| f.length()).sum();
            assert_eq!(total, rational_powi(&rat(2, 3), n as i64));
        }
    }

    #[test]
    fn s_power_sum_is_one() {
        let t = IfsSpec::triadic();
        for n in 0..=8 {
            let l = level(&t, n).unwrap();
            let mut total = Real::exact(int(0));
            for f in &l.retained {
                total = total.add(&t.dimension_power(&f.length(), 30).unwrap());
            }
            assert_eq!(total.as_rational(), Some(&int(1)));
        }
    }

    proptest! {
        #[test]
        fn refinement(n in 0usize..6, which in 0usize..2) {
            let spec = [IfsSpec::triadic(), make_spec(3, 2, 5, None).unwrap()][which].clone();
            let coarse = level(&spec, n).unwrap();
            let fine = level(&spec, n + 1).unwrap();
            for f in &fine.retained {
                let parents = coarse.retained.iter().filter(|c| c.contains_interval(f)).count();
                prop_assert_eq!(parents, 1);
            }
        }

        #[test]
        fn gaps_avoid_retained(num in 0i64..=3000, n in 1usize..7) {
            let t = IfsSpec::triadic();
            let x = rat(num, 3000);
            if let Membership::InGapAt { level: k, gap } = membership(&t, &x, 64).unwrap() {
                prop_assert!(gap.contains_interior(&x));
                let l = level(&t, k.max(n)).unwrap();
                for f in &l.retained {
                    prop_assert!(f.hi <= gap.lo || f.lo >= gap.hi);
                }
            }
        }
    }
}
