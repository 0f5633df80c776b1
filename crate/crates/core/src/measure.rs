//! Hausdorff and valued measure sums over canonical clopen covers.
//!
//! A target is a finite union of retained construction intervals. At level
//! `n` it is covered by its level-`n` retained sub-intervals. Every such
//! interval has length `r^-n`, so the Hausdorff sum is `count · p^-n` via
//! `r^s = p`. The valued sum adds the non-archimedean diameters of the same
//! intervals, computed from the separation norm of their endpoints.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cantor_set::{
    address_index, cantor_address, retained_interval, IfsSpec, RationalInterval,
    DEFAULT_INTERVAL_CAP,
};
use crate::error::{Error, Result};
use crate::numeric::{format_rational, pow_real, Rational, Real};
use crate::valuation::separation_norm;

/// A union of retained intervals, each named by `(level, index)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalTarget {
    pieces: Vec<(usize, u64)>,
}

impl CanonicalTarget {
    /// The whole limit set.
    pub fn whole() -> Self {
        CanonicalTarget {
            pieces: vec![(0, 0)],
        }
    }

    pub fn empty() -> Self {
        CanonicalTarget::default()
    }

    /// Validates intervals as retained construction intervals and drops
    /// duplicates and pieces nested inside others.
    pub fn from_intervals(spec: &IfsSpec, intervals: &[RationalInterval]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(intervals.len());
        for f in intervals {
            pieces.push(canonical_piece(spec, f)?);
        }
        Ok(Self::normalized(spec, pieces))
    }

    fn normalized(spec: &IfsSpec, mut pieces: Vec<(usize, u64)>) -> Self {
        pieces.sort_by_key(|&(m, i)| (m, i));
        pieces.dedup();
        let p = spec.p() as u64;
        let covered = |outer: &(usize, u64), inner: &(usize, u64)| {
            inner.0 > outer.0
                && p.checked_pow((inner.0 - outer.0) as u32)
                    .is_some_and(|w| inner.1 / w == outer.1)
        };
        let kept: Vec<_> = pieces
            .iter()
            .filter(|inner| !pieces.iter().any(|outer| covered(outer, inner)))
            .copied()
            .collect();
        CanonicalTarget { pieces: kept }
    }

    pub fn pieces(&self) -> &[(usize, u64)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Coarsest level at which every piece is a union of retained intervals.
    pub fn finest_level(&self) -> usize {
        self.pieces.iter().map(|&(m, _)| m).max().unwrap_or(0)
    }

    pub fn intervals(&self, spec: &IfsSpec) -> Result<Vec<RationalInterval>> {
        self.pieces
            .iter()
            .map(|&(m, i)| retained_interval(spec, m, i))
            .collect()
    }
}

fn canonical_piece(spec: &IfsSpec, f: &RationalInterval) -> Result<(usize, u64)> {
    let reject = || {
        Error::domain(format!(
            "[{}, {}] is not a retained construction interval",
            format_rational(&f.lo),
            format_rational(&f.hi)
        ))
    };
    let length = f.length();
    if length <= Rational::zero() || length > Rational::one() {
        return Err(reject());
    }
    // length must be r^-m
    let r = Rational::from_integer(spec.r().into());
    let mut m = 0usize;
    let mut width = Rational::one();
    while width > length {
        width /= &r;
        m += 1;
    }
    if width != length {
        return Err(reject());
    }
    let address = cantor_address(spec, &f.lo, m).map_err(|_| reject())?;
    let index = address_index(spec, &address);
    let g = retained_interval(spec, m, index)?;
    if g.lo != f.lo || g.hi != f.hi {
        return Err(reject());
    }
    Ok((m, index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverElement {
    pub interval: RationalInterval,
    pub euclid_diameter: Rational,
    /// Largest separation norm between points of the interval, `scale_used^s`.
    pub na_diameter: Rational,
    pub scale_used: Rational,
}

#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub target: CanonicalTarget,
    pub level: usize,
    pub cover: Vec<CoverElement>,
    /// `Σ d(Iᵢ)^s`
    pub mu_s_sum: Real,
    /// `Σ d_na(Iᵢ)`, or `Σ εᵢ^s'` when an exponent is imposed
    pub mu_v_sum: Real,
    pub s_used: Real,
}

impl MeasureReport {
    pub fn count(&self) -> usize {
        self.cover.len()
    }
}

/// Level-`n` canonical cover of a target, bounded by `cap` elements.
pub fn canonical_cover(
    spec: &IfsSpec,
    target: &CanonicalTarget,
    n: usize,
    cap: u64,
) -> Result<Vec<CoverElement>> {
    if target.finest_level() > n {
        return Err(Error::domain(format!(
            "target pieces at level {} cannot be covered at level {n}",
            target.finest_level()
        )));
    }
    let p = spec.p() as u64;
    let mut total = 0u64;
    for &(m, _) in target.pieces() {
        let refine = p.checked_pow((n - m) as u32).ok_or(Error::ResourceCap {
            what: "cover elements",
            requested: format!("{}^{}", p, n - m),
            cap,
        })?;
        total = total.saturating_add(refine);
    }
    if total > cap {
        return Err(Error::ResourceCap {
            what: "cover elements",
            requested: total.to_string(),
            cap,
        });
    }
    let mut cover = Vec::with_capacity(total as usize);
    for &(m, index) in target.pieces() {
        let width = p.pow((n - m) as u32);
        for sub in index * width..(index + 1) * width {
            let interval = retained_interval(spec, n, sub)?;
            // the right endpoint may be shared with the next interval, so
            // pair the left endpoint with a point of the last child instead
            let last_child = retained_interval(spec, n + 1, sub * p + p - 1)?;
            let na_diameter = separation_norm(spec, &interval.lo, &last_child.lo)?;
            let length = interval.length();
            cover.push(CoverElement {
                euclid_diameter: length.clone(),
                scale_used: length,
                na_diameter,
                interval,
            });
        }
    }
    Ok(cover)
}

/// `Σ count · d^e` grouped by distinct diameters.
fn power_sum(
    spec: &IfsSpec,
    diameters: impl Iterator<Item = Rational>,
    exponent: Option<&Real>,
    precision: u32,
) -> Result<Real> {
    let mut groups: BTreeMap<Rational, u64> = BTreeMap::new();
    for d in diameters {
        *groups.entry(d).or_default() += 1;
    }
    let mut sum = Real::exact(Rational::zero());
    for (d, count) in groups {
        let term = match exponent {
            None => spec.dimension_power(&d, precision)?,
            Some(e) => pow_real(&d, e, precision)?,
        };
        sum = sum.add(&Real::exact(Rational::from_integer(count.into())).mul(&term));
    }
    Ok(sum)
}

/// Both sums over the level-`n` canonical cover. With `exponent` set, `s'`
/// replaces the dimension in both sums.
pub fn measure_report(
    spec: &IfsSpec,
    target: &CanonicalTarget,
    n: usize,
    exponent: Option<&Real>,
    precision: u32,
) -> Result<MeasureReport> {
    let cover = canonical_cover(spec, target, n, DEFAULT_INTERVAL_CAP)?;
    let mu_s_sum = power_sum(
        spec,
        cover.iter().map(|c| c.euclid_diameter.clone()),
        exponent,
        precision,
    )?;
    let mu_v_sum = match exponent {
        None => Real::exact(cover.iter().map(|c| &c.na_diameter).sum()),
        Some(_) => power_sum(spec, cover.iter().map(|c| c.scale_used.clone()), exponent, precision)?,
    };
    let s_used = match exponent {
        Some(e) => e.clone(),
        None => crate::cantor_set::hausdorff_dimension_with(spec, precision),
    };
    Ok(MeasureReport {
        target: target.clone(),
        level: n,
        cover,
        mu_s_sum,
        mu_v_sum,
        s_used,
    })
}

/// Hausdorff `s`-sum of the level-`n` canonical cover (with the valued sum alongside).
pub fn hausdorff_measure_estimate(
    spec: &IfsSpec,
    target: &CanonicalTarget,
    n: usize,
    precision: u32,
) -> Result<MeasureReport> {
    measure_report(spec, target, n, None, precision)
}

/// Valued measure sum of the level-`n` canonical cover (with the Hausdorff sum alongside).
pub fn valued_measure_estimate(
    spec: &IfsSpec,
    target: &CanonicalTarget,
    n: usize,
    precision: u32,
) -> Result<MeasureReport> {
    measure_report(spec, target, n, None, precision)
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: usize,
    pub count: usize,
    pub mu_s: Real,
    pub mu_v: Real,
    /// `mu_v / mu_s`, zero for an empty target.
    pub ratio: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub count: usize,
    pub mu_s: String,
    pub mu_v: String,
    pub ratio: String,
}

impl From<&ConvergenceRow> for ConvergenceRecord {
    fn from(row: &ConvergenceRow) -> Self {
        ConvergenceRecord {
            n: row.n,
            count: row.count,
            mu_s: row.mu_s.to_string(),
            mu_v: row.mu_v.to_string(),
            ratio: row.ratio.to_string(),
        }
    }
}

/// Rows for `n` from `max(1, finest target level)` to `n_max`.
pub fn measure_convergence_table(
    spec: &IfsSpec,
    target: &CanonicalTarget,
    n_max: usize,
    exponent: Option<&Real>,
    precision: u32,
) -> Result<Vec<ConvergenceRow>> {
    let start = target.finest_level().max(1);
    (start..=n_max)
        .map(|n| {
            let report = measure_report(spec, target, n, exponent, precision)?;
            let ratio = if report.mu_s_sum.to_rational().is_zero() {
                Real::exact(Rational::zero())
            } else {
                report.mu_v_sum.div(&report.mu_s_sum)
            };
            Ok(ConvergenceRow {
                n,
                count: report.count(),
                mu_s: report.mu_s_sum,
                mu_v: report.mu_v_sum,
                ratio,
            })
        })
        .collect()
}

/// Level sums `pⁿ · r^(-n s')` for `n = 1..=n_max`.
pub fn dimension_sweep(spec: &IfsSpec, exponent: &Real, n_max: usize, precision: u32) -> Result<Vec<Real>> {
    let r = Rational::from_integer(spec.r().into());
    let p = Rational::from_integer(spec.p().into());
    (1..=n_max)
        .map(|n| {
            let width = crate::numeric::rational_powi(&r, -(n as i64));
            let count = crate::numeric::rational_powi(&p, n as i64);
            Ok(Real::exact(count).mul(&pow_real(&width, exponent, precision)?))
        })
        .collect()
}
