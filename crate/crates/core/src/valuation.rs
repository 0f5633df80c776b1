//! Scale-relative valuation of infinitesimals and the induced norm on the
//! Cantor set.
//!
//! For a scale `0 < ε < 1` and `0 < x ≤ ε`, `v(x) = log_{1/ε}(ε/x)`, so that
//! `x = ε^(1+v(x))`.

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::cantor_set::{
    address_index, cantor_address, level, membership, retained_interval, IfsSpec,
    Membership, RationalInterval,
};
use crate::error::{Error, Result};
use crate::numeric::{
    format_rational, log_ratio, pow_real, rational_powi, Rational, Real,
};
use crate::staircase::{cantor_function, DEFAULT_MAX_LEVEL};

fn as_text<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

fn real_text<S: Serializer>(x: &Real, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Scale(#[serde(serialize_with = "as_text")] Rational);

impl Scale {
    pub fn new(epsilon: Rational) -> Result<Self> {
        if !epsilon.is_positive() || epsilon >= Rational::one() {
            return Err(Error::domain(format!(
                "scale must lie in (0, 1), got {}",
                format_rational(&epsilon)
            )));
        }
        Ok(Scale(epsilon))
    }

    pub fn epsilon(&self) -> &Rational {
        &self.0
    }

    /// `v(x) = log_{1/ε}(ε/x)` for any `x > 0`; not restricted to `x ≤ ε`.
    pub fn valuation_of(&self, x: &Rational, precision: u32) -> Result<Real> {
        if !x.is_positive() {
            return Err(Error::domain("valuation needs a positive argument"));
        }
        log_ratio(&(&self.0 / x), &self.0.recip(), precision)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValuedInfinitesimal {
    #[serde(serialize_with = "as_text")]
    pub x_tilde: Rational,
    pub scale: Scale,
    #[serde(serialize_with = "real_text")]
    pub v: Real,
    /// `x̃ / ε`
    #[serde(serialize_with = "as_text")]
    pub lambda: Rational,
}

impl ValuedInfinitesimal {
    /// `ε^(1+v)`, which recovers `x̃`.
    pub fn reconstruct(&self, precision: u32) -> Result<Real> {
        let e = Real::exact(Rational::one()).add(&self.v);
        pow_real(self.scale.epsilon(), &e, precision)
    }
}

pub fn infinitesimal_valuation(
    x_tilde: &Rational,
    scale: &Scale,
    precision: u32,
) -> Result<ValuedInfinitesimal> {
    if !x_tilde.is_positive() || x_tilde > scale.epsilon() {
        return Err(Error::domain(format!(
            "{} is not an infinitesimal relative to the scale {}",
            format_rational(x_tilde),
            format_rational(scale.epsilon())
        )));
    }
    Ok(ValuedInfinitesimal {
        x_tilde: x_tilde.clone(),
        scale: scale.clone(),
        v: scale.valuation_of(x_tilde, precision)?,
        lambda: x_tilde / scale.epsilon(),
    })
}

/// Valuations of `α` at scales decreasing towards it: `ε_k = α + (1 − α)·2^-k`.
///
/// Points of the real line carry no infinitesimal structure, and the
/// sequence tends to zero.
pub fn approach_valuation(alpha: &Rational, steps: usize, precision: u32) -> Result<Vec<(Rational, Real)>> {
    if !alpha.is_positive() || alpha >= &Rational::one() {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    let one = Rational::one();
    (1..=steps)
        .map(|k| {
            let eps = alpha + (&one - alpha) * rational_powi(&Rational::from_integer(2.into()), -(k as i64));
            let v = Scale::new(eps.clone())?.valuation_of(alpha, precision)?;
            Ok((eps, v))
        })
        .collect()
}

/// Multipliers used for the scaling check when none are supplied.
pub fn default_scaling_factors() -> Vec<Rational> {
    [(1, 2), (2, 3), (3, 2), (1, 10)]
        .iter()
        .map(|&(n, d)| Rational::new(n.into(), d.into()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    #[serde(serialize_with = "as_text")]
    pub x1: Rational,
    #[serde(serialize_with = "as_text")]
    pub x2: Rational,
    pub valid: bool,
    pub positivity: bool,
    /// Number of factors `α` with `α(x₁ + x₂) < ε` that were checked.
    pub scaling_checked: usize,
    pub scaling: bool,
    pub strong_triangle: bool,
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        self.valid && self.positivity && self.scaling && self.strong_triangle
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub scale: Scale,
    pub precision: u32,
    pub pairs: Vec<PairCheck>,
    pub invalid: usize,
    pub failures: usize,
    pub all_pass: bool,
}

/// Checks positivity, scaling and the strong triangle inequality on sample pairs.
///
/// A pair must satisfy `0 < x₁ ≤ x₂` and `x₁ + x₂ < ε`; other pairs are
/// flagged invalid and skipped. At a fixed scale, `v(αx) = v(x) − log_{1/ε} α`,
/// so a real factor shifts every valuation by the same amount and leaves the
/// valuation order unchanged: the scaling check compares `v(αx₁) − v(αx₂)`
/// with `v(x₁) − v(x₂)`.
pub fn ultrametric_axiom_report(
    scale: &Scale,
    samples: &[(Rational, Rational)],
    factors: &[Rational],
    precision: u32,
) -> Result<AxiomReport> {
    // each valuation is within 10^-precision, and checks combine up to four
    let tol = rational_powi(&Rational::from_integer(10.into()), -(precision as i64))
        * Rational::from_integer(4.into());
    let eps = scale.epsilon();
    let mut pairs = Vec::with_capacity(samples.len());
    for (x1, x2) in samples {
        let sum = x1 + x2;
        let valid = x1.is_positive() && x1 <= x2 && &sum < eps;
        let mut check = PairCheck {
            x1: x1.clone(),
            x2: x2.clone(),
            valid,
            positivity: false,
            scaling_checked: 0,
            scaling: false,
            strong_triangle: false,
        };
        if valid {
            let v1 = scale.valuation_of(x1, precision)?;
            let v2 = scale.valuation_of(x2, precision)?;
            let v12 = scale.valuation_of(&sum, precision)?;
            let zero = Real::exact(Rational::zero());
            check.positivity = [&v1, &v2, &v12].iter().all(|v| zero.le_within(v, &tol));
            let larger = if v1.to_rational() >= v2.to_rational() { &v1 } else { &v2 };
            check.strong_triangle = v12.le_within(larger, &tol);

            let spread = v1.sub(&v2);
            let mut scaling = true;
            for a in factors {
                if !a.is_positive() || a * &sum >= *eps {
                    continue;
                }
                check.scaling_checked += 1;
                let w1 = scale.valuation_of(&(a * x1), precision)?;
                let w2 = scale.valuation_of(&(a * x2), precision)?;
                scaling &= w1.sub(&w2).abs_diff(&spread) <= tol;
            }
            check.scaling = scaling && check.scaling_checked > 0;
        }
        pairs.push(check);
    }
    let invalid = pairs.iter().filter(|c| !c.valid).count();
    let failures = pairs.iter().filter(|c| c.valid && !c.passed()).count();
    Ok(AxiomReport {
        scale: scale.clone(),
        precision,
        all_pass: invalid == 0 && failures == 0,
        pairs,
        invalid,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSetEntry {
    pub gap: RationalInterval,
    pub value: Rational,
}

#[derive(Debug, Clone)]
pub struct ValuedZeroSet {
    pub spec: IfsSpec,
    pub level: usize,
    /// Gaps left to right with their values.
    pub entries: Vec<ZeroSetEntry>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroSetRow {
    pub level: usize,
    pub gap_lo: String,
    pub gap_hi: String,
    pub value: String,
}

impl ValuedZeroSet {
    pub fn values(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn rows(&self) -> Vec<ZeroSetRow> {
        self.entries
            .iter()
            .map(|e| ZeroSetRow {
                level: self.level,
                gap_lo: format_rational(&e.gap.lo),
                gap_hi: format_rational(&e.gap.hi),
                value: format_rational(&e.value),
            })
            .collect()
    }
}

/// Values at level `n` from those at level `n − 1`: the old values plus the
/// means of consecutive members of `{0, …, 1}`.
fn refine_values(previous: &[Rational]) -> Vec<Rational> {
    let two = Rational::from_integer(2.into());
    let mut padded = vec![Rational::zero()];
    padded.extend_from_slice(previous);
    padded.push(Rational::one());
    let mut out = Vec::with_capacity(2 * previous.len() + 1);
    for w in padded.windows(2) {
        if !w[0].is_zero() {
            out.push(w[0].clone());
        }
        out.push((&w[0] + &w[1]) / &two);
    }
    out
}

/// The level-`n` gaps labelled with their valuation values.
///
/// Two-branch sets use the mean-of-consecutive-values recursion. Other sets
/// take the generalized staircase value on each gap and say so in `note`.
pub fn valued_zero_set(spec: &IfsSpec, n: usize) -> Result<ValuedZeroSet> {
    if n < 1 {
        return Err(Error::domain("zero-set level must be at least 1"));
    }
    let gaps = level(spec, n)?.gaps;
    let (values, note) = if spec.p() == 2 {
        let mut values = Vec::new();
        for _ in 0..n {
            values = refine_values(&values);
        }
        (values, None)
    } else {
        let values = gaps
            .iter()
            .map(|g| cantor_function(spec, &g.lo, n + 2).map(|v| v.y))
            .collect::<Result<Vec<_>>>()?;
        let note = format!(
            "extension: p = {} values are the generalized staircase values on each gap",
            spec.p()
        );
        (values, Some(note))
    };
    debug_assert_eq!(values.len(), gaps.len());
    let entries = gaps
        .into_iter()
        .zip(values)
        .map(|(gap, value)| ZeroSetEntry { gap, value })
        .collect();
    Ok(ValuedZeroSet {
        spec: spec.clone(),
        level: n,
        entries,
        note,
    })
}

/// Norm shared by every level-`n` retained interval: `r^(-ns) = p^-n`.
pub fn interval_norm(spec: &IfsSpec, n: usize) -> Rational {
    rational_powi(&Rational::from_integer(spec.p().into()), -(n as i64))
}

/// Exponent of the norm: the set's own dimension or a fixed value.
#[derive(Debug, Clone)]
pub enum NormExponent {
    Dimension,
    Value(Real),
}

/// The coefficients `αₙ` and exponent `s₀` with `||x|| = inf αₙ ε^s₀`.
#[derive(Debug, Clone)]
pub struct ValuationProfile {
    pub alpha_values: Vec<Rational>,
    pub s0: NormExponent,
}

impl Default for ValuationProfile {
    fn default() -> Self {
        ValuationProfile {
            alpha_values: vec![Rational::one()],
            s0: NormExponent::Dimension,
        }
    }
}

impl ValuationProfile {
    pub fn new(alpha_values: Vec<Rational>, s0: NormExponent) -> Result<Self> {
        if alpha_values.is_empty() || alpha_values.iter().any(|a| !a.is_positive()) {
            return Err(Error::domain("profile needs at least one positive alpha"));
        }
        Ok(ValuationProfile { alpha_values, s0 })
    }
}

/// `||x|| = inf αₙ ε^s₀` for a point of the set; `ε^s` with the default profile.
pub fn point_norm(
    x: &Rational,
    scale: &Scale,
    spec: &IfsSpec,
    profile: &ValuationProfile,
    precision: u32,
) -> Result<Real> {
    match membership(spec, x, DEFAULT_MAX_LEVEL)? {
        Membership::InC => {}
        Membership::InGapAt { .. } => {
            return Err(Error::domain(format!(
                "{} is not a point of the set",
                format_rational(x)
            )))
        }
        Membership::UndecidedAt(n) => {
            return Err(Error::domain(format!(
                "membership of {} not verified within {n} levels",
                format_rational(x)
            )))
        }
    }
    let power = match &profile.s0 {
        NormExponent::Dimension => spec.dimension_power(scale.epsilon(), precision)?,
        NormExponent::Value(s0) => pow_real(scale.epsilon(), s0, precision)?,
    };
    let alpha = profile
        .alpha_values
        .iter()
        .min()
        .ok_or_else(|| Error::domain("empty valuation profile"))?;
    Ok(Real::exact(alpha.clone()).mul(&power))
}

/// Deepest level at which two points share a retained interval.
fn common_depth(spec: &IfsSpec, x: &Rational, y: &Rational) -> Result<usize> {
    // sharing a level-m interval forces |x − y| ≤ r^-m
    let gap = (x - y).abs();
    let r = Rational::from_integer(spec.r().into());
    let mut bound = 0usize;
    let mut width = Rational::one();
    while width >= gap {
        width /= &r;
        bound += 1;
    }
    let a = cantor_address(spec, x, bound)?;
    let b = cantor_address(spec, y, bound)?;
    Ok(a.iter().zip(&b).take_while(|(u, v)| u == v).count())
}

/// `||x − y||` for points of the set: `ε^s = p^-m` with `ε = r^-m` the
/// length of the smallest canonical interval holding both.
pub fn separation_norm(spec: &IfsSpec, x: &Rational, y: &Rational) -> Result<Rational> {
    if x == y {
        cantor_address(spec, x, 1)?;
        return Ok(Rational::zero());
    }
    Ok(interval_norm(spec, common_depth(spec, x, y)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct NeighborPair {
    #[serde(serialize_with = "as_text")]
    pub x: Rational,
    #[serde(serialize_with = "real_text")]
    pub exponent: Real,
    #[serde(serialize_with = "real_text")]
    pub x_plus: Real,
    #[serde(serialize_with = "real_text")]
    pub x_minus: Real,
}

/// `x^(1+e)` and `x^(1−e)`, the valued neighbours `x·x^(±e)`.
pub fn multiplicative_neighbors(x: &Rational, exponent: &Real, precision: u32) -> Result<NeighborPair> {
    if !x.is_positive() || x >= &Rational::one() {
        return Err(Error::domain(format!(
            "neighbours need 0 < x < 1, got {}",
            format_rational(x)
        )));
    }
    if exponent.to_rational().is_negative() {
        return Err(Error::domain("neighbour exponent must be nonnegative"));
    }
    let one = Real::exact(Rational::one());
    Ok(NeighborPair {
        x: x.clone(),
        exponent: exponent.clone(),
        x_plus: pow_real(x, &one.add(exponent), precision)?,
        x_minus: pow_real(x, &one.sub(exponent), precision)?,
    })
}

/// Finite-`k` stage of the limiting construction of neighbours of `x`.
#[derive(Debug, Clone, Serialize)]
pub struct NeighborLimit {
    pub k: usize,
    /// 1-based index of the level-`k` retained interval holding `x`.
    pub j: u64,
    #[serde(serialize_with = "as_text")]
    pub x_minus: Rational,
    #[serde(serialize_with = "as_text")]
    pub x_plus: Rational,
    #[serde(serialize_with = "as_text")]
    pub value_minus: Rational,
    #[serde(serialize_with = "as_text")]
    pub value: Rational,
    #[serde(serialize_with = "as_text")]
    pub value_plus: Rational,
    /// `r^k (x₊ − x)`
    #[serde(serialize_with = "as_text")]
    pub right_gap: Rational,
    /// `r^k (x − x₋)`
    #[serde(serialize_with = "as_text")]
    pub left_gap: Rational,
    /// `p^k (f(x₊) − f(x))`
    #[serde(serialize_with = "as_text")]
    pub right_value_gap: Rational,
    /// `p^k (f(x) − f(x₋))`
    #[serde(serialize_with = "as_text")]
    pub left_value_gap: Rational,
    /// Both scaled pairs sum to the same total.
    pub balanced: bool,
    /// Largest of the value-gap to gap ratios on the sides where `x` is interior.
    #[serde(serialize_with = "opt_text")]
    pub max_ratio: Option<Rational>,
}

fn opt_text<S: Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&format_rational(v)),
        None => s.serialize_none(),
    }
}

pub fn neighbor_limit_construction(spec: &IfsSpec, x: &Rational, k: usize) -> Result<NeighborLimit> {
    if k < 1 {
        return Err(Error::domain("level k must be at least 1"));
    }
    match membership(spec, x, DEFAULT_MAX_LEVEL)? {
        Membership::InC => {}
        _ => {
            return Err(Error::domain(format!(
                "{} is not a verified point of the set",
                format_rational(x)
            )))
        }
    }
    let index = address_index(spec, &cantor_address(spec, x, k)?);
    let f = retained_interval(spec, k, index)?;
    let value = |t: &Rational| -> Result<Rational> {
        let v = cantor_function(spec, t, DEFAULT_MAX_LEVEL)?;
        if !v.exact {
            return Err(Error::domain(format!(
                "staircase value at {} not resolved",
                format_rational(t)
            )));
        }
        Ok(v.y)
    };
    let (fm, f0, fp) = (value(&f.lo)?, value(x)?, value(&f.hi)?);
    let rk = Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(spec.r()), k));
    let pk = Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(spec.p()), k));
    let right_gap = &rk * (&f.hi - x);
    let left_gap = &rk * (x - &f.lo);
    let right_value_gap = &pk * (&fp - &f0);
    let left_value_gap = &pk * (&f0 - &fm);
    let balanced = &right_gap + &left_gap == &right_value_gap + &left_value_gap;
    let max_ratio = [(&right_value_gap, &right_gap), (&left_value_gap, &left_gap)]
        .into_iter()
        .filter(|(_, d)| d.is_positive())
        .map(|(n, d)| n / d)
        .max();
    Ok(NeighborLimit {
        k,
        j: index + 1,
        x_minus: f.lo,
        x_plus: f.hi,
        value_minus: fm,
        value: f0,
        value_plus: fp,
        right_gap,
        left_gap,
        right_value_gap,
        left_value_gap,
        balanced,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor_set::make_spec;
    use crate::numeric::{int, parse_rational, rat, value_from_digits, DigitSequence};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scale(n: i64, d: i64) -> Scale {
        Scale::new(rat(n, d)).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let s = scale(1, 9);
        let at_scale = infinitesimal_valuation(&rat(1, 9), &s, 30).unwrap();
        assert_eq!(at_scale.v.as_rational(), Some(&int(0)));
        let squared = infinitesimal_valuation(&rat(1, 81), &s, 30).unwrap();
        assert_eq!(squared.v.as_rational(), Some(&int(1)));
        let half = infinitesimal_valuation(&rat(1, 27), &s, 30).unwrap();
        assert_eq!(half.v.as_rational(), Some(&rat(1, 2)));
        assert_eq!(half.lambda, rat(1, 3));
        assert_eq!(half.reconstruct(30).unwrap().as_rational(), Some(&rat(1, 27)));
        assert!(infinitesimal_valuation(&rat(1, 8), &s, 30).is_err());
        assert!(infinitesimal_valuation(&int(0), &s, 30).is_err());
        assert!(Scale::new(int(1)).is_err());
        assert!(Scale::new(int(0)).is_err());
    }

    #[test]
    fn irrational_valuation() {
        // mpmath: log(3/2)/log(3) to 40 digits
        let v = infinitesimal_valuation(&rat(2, 9), &scale(1, 3), 30).unwrap();
        let reference = parse_rational("0.3690702464285425629004728856572391457004").unwrap();
        assert!((v.v.to_rational() - reference).abs() < rat(1, 10).pow(30));
        assert!(!v.v.is_exact());
    }

    #[test]
    fn reconstruction_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let eps = rat(rng.gen_range(1..=999), 1000);
            let x = &eps * rat(rng.gen_range(1..=1_000_000), 1_000_000)
                * rational_powi(&eps, rng.gen_range(0..4));
            let vi = infinitesimal_valuation(&x, &Scale::new(eps).unwrap(), 30).unwrap();
            assert!(!vi.v.to_rational().is_negative());
            let back = vi.reconstruct(30).unwrap();
            assert!(back.abs_diff(&Real::exact(x)) <= rat(1, 10).pow(28));
        }
    }

    #[test]
    fn axiom_report_examples() {
        let factors = default_scaling_factors();
        let r = ultrametric_axiom_report(&scale(1, 3), &[(rat(1, 27), rat(1, 27))], &factors, 30).unwrap();
        assert!(r.all_pass);
        assert!(r.pairs[0].scaling_checked >= 1);
        let r = ultrametric_axiom_report(&scale(1, 2), &[(rat(1, 4), rat(1, 4))], &factors, 30);
        // x₁ + x₂ = ε is not admissible
        let r = r.unwrap();
        assert_eq!(r.invalid, 1);
        assert!(!r.all_pass);
        let r = ultrametric_axiom_report(&scale(1, 2), &[(rat(1, 5), rat(1, 5))], &factors, 30).unwrap();
        assert!(r.all_pass);
        let r = ultrametric_axiom_report(&scale(1, 3), &[(rat(1, 9), rat(1, 27))], &factors, 30).unwrap();
        assert_eq!(r.invalid, 1);
    }

    #[test]
    fn axiom_report_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, d) in [(1, 3), (1, 9), (1, 100)] {
            let s = scale(n, d);
            let pairs: Vec<_> = (0..300)
                .map(|_| {
                    let a = s.epsilon() * rat(rng.gen_range(1..=499_999), 1_000_000);
                    let b = s.epsilon() * rat(rng.gen_range(1..=499_999), 1_000_000);
                    if a <= b { (a, b) } else { (b, a) }
                })
                .collect();
            let r = ultrametric_axiom_report(&s, &pairs, &default_scaling_factors(), 30).unwrap();
            assert!(r.all_pass, "failures {} invalid {}", r.failures, r.invalid);
        }
    }

    #[test]
    fn real_like_points_have_vanishing_valuation() {
        let seq = approach_valuation(&rat(1, 5), 40, 30).unwrap();
        let mags: Vec<f64> = seq.iter().map(|(_, v)| v.to_f64().abs()).collect();
        assert!(mags.windows(2).all(|w| w[1] < w[0]));
        assert!(mags[39] < 1e-11);
    }

    #[test]
    fn zero_sets() {
        let t = IfsSpec::triadic();
        let z1 = valued_zero_set(&t, 1).unwrap();
        assert_eq!(z1.values(), vec![rat(1, 2)]);
        assert_eq!((z1.entries[0].gap.lo.clone(), z1.entries[0].gap.hi.clone()), (rat(1, 3), rat(2, 3)));
        let z2 = valued_zero_set(&t, 2).unwrap();
        assert_eq!(z2.values(), vec![rat(1, 4), rat(2, 4), rat(3, 4)]);
        let bounds: Vec<_> = z2.entries.iter().map(|e| (e.gap.lo.clone(), e.gap.hi.clone())).collect();
        assert_eq!(bounds, vec![(rat(1, 9), rat(2, 9)), (rat(3, 9), rat(6, 9)), (rat(7, 9), rat(8, 9))]);
        let z3 = valued_zero_set(&t, 3).unwrap();
        assert_eq!(z3.values(), (1..8).map(|j| rat(j, 8)).collect::<Vec<_>>());
        assert!(z3.note.is_none());
        assert!(valued_zero_set(&t, 0).is_err());
        let rows = z2.rows();
        assert_eq!(rows[1].gap_hi, "2/3");
        assert_eq!(rows[1].value, "1/2");
    }

    #[test]
    fn zero_sets_match_staircase_and_refine() {
        for spec in [IfsSpec::triadic(), make_spec(2, 2, 4, None).unwrap(), make_spec(3, 2, 5, None).unwrap()] {
            let top = if spec.p() == 2 { 8 } else { 5 };
            let mut previous: Vec<Rational> = Vec::new();
            for n in 1..=top {
                let z = valued_zero_set(&spec, n).unwrap();
                let p = spec.p() as i64;
                assert_eq!(z.entries.len() as i64, p.pow(n as u32) - 1);
                assert!(z.values().windows(2).all(|w| w[0] < w[1]));
                for e in &z.entries {
                    let mid = cantor_function(&spec, &e.gap.midpoint(), 64).unwrap();
                    assert_eq!(mid.y, e.value);
                }
                let values = z.values();
                assert!(previous.iter().all(|v| values.contains(v)));
                previous = values;
                assert_eq!(z.note.is_some(), spec.p() != 2);
            }
        }
    }

    #[test]
    fn norms() {
        let t = IfsSpec::triadic();
        assert_eq!(interval_norm(&t, 2), rat(1, 4));
        assert_eq!(interval_norm(&t, 1), rat(1, 2));
        assert_eq!(interval_norm(&t, 0), int(1));
        let profile = ValuationProfile::default();
        let n = point_norm(&rat(1, 4), &scale(1, 9), &t, &profile, 30).unwrap();
        assert_eq!(n.as_rational(), Some(&rat(1, 4)));
        let n = point_norm(&int(0), &scale(1, 3), &t, &profile, 30).unwrap();
        assert_eq!(n.as_rational(), Some(&rat(1, 2)));
        assert!(point_norm(&rat(1, 2), &scale(1, 3), &t, &profile, 30).is_err());
        let custom = ValuationProfile::new(vec![rat(3, 2), rat(1, 2)], NormExponent::Value(Real::exact(int(1)))).unwrap();
        let n = point_norm(&rat(1, 4), &scale(1, 9), &t, &custom, 30).unwrap();
        assert_eq!(n.as_rational(), Some(&rat(1, 18)));
        assert!(ValuationProfile::new(vec![], NormExponent::Dimension).is_err());
    }

    #[test]
    fn separation() {
        let t = IfsSpec::triadic();
        assert_eq!(separation_norm(&t, &int(0), &int(1)).unwrap(), int(1));
        assert_eq!(separation_norm(&t, &int(0), &rat(2, 9)).unwrap(), rat(1, 2));
        assert_eq!(separation_norm(&t, &rat(1, 4), &rat(1, 4)).unwrap(), int(0));
        assert_eq!(separation_norm(&t, &int(0), &rat(1, 27)).unwrap(), rat(1, 8));
        assert!(separation_norm(&t, &int(0), &rat(1, 2)).is_err());
    }

    fn point_from_address(spec: &IfsSpec, digits: &[u32]) -> Rational {
        let keeps = spec.keep_slots();
        let mapped = digits.iter().map(|&d| keeps[d as usize]).collect();
        value_from_digits(&DigitSequence::new(spec.r(), mapped, None).unwrap())
    }

    proptest! {
        #[test]
        fn separation_is_ultrametric(
            a in proptest::collection::vec(0u32..2, 1..12),
            b in proptest::collection::vec(0u32..2, 1..12),
            c in proptest::collection::vec(0u32..2, 1..12),
        ) {
            let t = IfsSpec::triadic();
            let (x, y, z) = (point_from_address(&t, &a), point_from_address(&t, &b), point_from_address(&t, &c));
            let xz = separation_norm(&t, &x, &z).unwrap();
            let xy = separation_norm(&t, &x, &y).unwrap();
            let yz = separation_norm(&t, &y, &z).unwrap();
            prop_assert!(xz <= xy.clone().max(yz));
            prop_assert_eq!(separation_norm(&t, &y, &x).unwrap(), xy);
        }

        #[test]
        fn neighbor_ordering(num in 1i64..1000, exp_num in 1i64..1000) {
            let x = rat(num, 1000);
            let e = Real::exact(rat(exp_num, 1000));
            let pair = multiplicative_neighbors(&x, &e, 30).unwrap();
            prop_assert!(pair.x_plus.to_rational() < x);
            prop_assert!(x < pair.x_minus.to_rational());
            let product = pair.x_plus.mul(&pair.x_minus);
            prop_assert!(product.abs_diff(&Real::exact(&x * &x)) < rat(1, 10).pow(28));
        }
    }

    #[test]
    fn neighbor_examples() {
        let p = multiplicative_neighbors(&rat(1, 2), &Real::exact(int(0)), 30).unwrap();
        assert_eq!(p.x_plus.as_rational(), Some(&rat(1, 2)));
        assert_eq!(p.x_minus.as_rational(), Some(&rat(1, 2)));
        let p = multiplicative_neighbors(&rat(1, 2), &Real::exact(rat(1, 10)), 30).unwrap();
        // mpmath: 2^-1.1
        let reference = parse_rational("0.46651649576840370799067163307497108351361498217575").unwrap();
        assert!((p.x_plus.to_rational() - reference).abs() < rat(1, 10).pow(29));
        assert!(multiplicative_neighbors(&int(1), &Real::exact(int(0)), 30).is_err());
        assert!(multiplicative_neighbors(&rat(1, 2), &Real::exact(rat(-1, 2)), 30).is_err());
    }

    #[test]
    fn limit_construction() {
        let t = IfsSpec::triadic();
        let at_zero = neighbor_limit_construction(&t, &int(0), 3).unwrap();
        assert_eq!((at_zero.x_minus.clone(), at_zero.x_plus.clone()), (int(0), rat(1, 27)));
        assert_eq!(at_zero.right_gap, int(1));
        assert_eq!(at_zero.left_gap, int(0));
        assert_eq!(at_zero.j, 1);
        assert!(at_zero.balanced);
        let third = neighbor_limit_construction(&t, &rat(1, 3), 2).unwrap();
        assert_eq!((third.x_minus.clone(), third.x_plus.clone()), (rat(2, 9), rat(1, 3)));
        assert_eq!(third.j, 2);
        assert_eq!(third.left_gap, int(1));
        let quarter = neighbor_limit_construction(&t, &rat(1, 4), 6).unwrap();
        assert!(quarter.balanced);
        assert!(quarter.max_ratio.unwrap() >= int(1));
        assert!(neighbor_limit_construction(&t, &rat(1, 2), 2).is_err());
    }

    #[test]
    fn limit_construction_balance_everywhere() {
        for spec in [IfsSpec::triadic(), make_spec(3, 2, 5, None).unwrap()] {
            for k in 1..=4 {
                for f in &level(&spec, k + 2).unwrap().retained {
                    let c = neighbor_limit_construction(&spec, &f.lo, k).unwrap();
                    assert!(c.balanced);
                    assert!(c.x_minus <= f.lo && f.lo <= c.x_plus);
                    if let Some(m) = c.max_ratio {
                        assert!(m >= int(1));
                    }
                }
            }
        }
    }
}
