//! Error-bounded arithmetic on the circle R/Z: rotation orbits, the
//! distance to zero, closest approach between orbits, spacing facts and
//! the orbit-window exclusion sets.
//!
//! Points carry an exact rational value plus an absolute error bound.
//! Rotation by an exact rational angle is an isometry, so orbits of
//! exactly-known points stay exact no matter how many steps are taken;
//! error enters only through user-supplied uncertain inputs, and every
//! threshold comparison is ternary with automatic refinement.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalError};
use crate::numeration::{ContinuedFraction, NumerationError, PRECISION_LADDER};
use crate::scalar::{decimal_string, parse_decimal, TernaryOrder};

/// Error bounds past this are treated as corrupt inputs.
const ERR_CAP_LOG2: u32 = 16;

#[derive(Debug, Error)]
pub enum CircleError {
    #[error("error bound {0} exceeds the 2^-16 cap")]
    ErrTooLarge(String),
    #[error("comparison against a set boundary undecided at {0} bits")]
    Precision(u32),
    #[error("q_{n} = {q} makes the logarithmic thresholds degenerate")]
    Degenerate { n: usize, q: String },
    #[error("negative error bound")]
    NegativeErr,
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Numeration(#[from] NumerationError),
}

/// A point of the circle: exact rational representative in [0,1) plus
/// an absolute error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePoint {
    value: BigRational,
    err: BigRational,
}

pub(crate) fn frac(v: &BigRational) -> BigRational {
    let f = v - v.floor();
    if f >= BigRational::one() {
        f - BigRational::one()
    } else {
        f
    }
}

impl CirclePoint {
    pub fn exact(value: BigRational) -> Self {
        CirclePoint { value: frac(&value), err: BigRational::zero() }
    }

    pub fn zero() -> Self {
        CirclePoint::exact(BigRational::zero())
    }

    pub fn with_err(value: BigRational, err: BigRational) -> Result<Self, CircleError> {
        if err.is_negative() {
            return Err(CircleError::NegativeErr);
        }
        let cap = BigRational::new(BigInt::one(), BigInt::one() << ERR_CAP_LOG2);
        if err >= cap {
            return Err(CircleError::ErrTooLarge(err.to_string()));
        }
        Ok(CirclePoint { value: frac(&value), err })
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn err(&self) -> &BigRational {
        &self.err
    }

    pub fn is_exact(&self) -> bool {
        self.err.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    /// {self + j alpha}; rotation is an isometry so the error bound is
    /// carried through unchanged.
    pub fn rotate(&self, alpha: &BigRational, j: &BigInt) -> CirclePoint {
        CirclePoint {
            value: frac(&(&self.value + BigRational::from_integer(j.clone()) * alpha)),
            err: self.err.clone(),
        }
    }

    /// Distance to zero on the circle, with the point's own error bound.
    pub fn norm(&self) -> BoundedReal {
        BoundedReal { value: circle_norm(&self.value), err: self.err.clone() }
    }

    /// Distance to another point; errors add.
    pub fn dist(&self, other: &CirclePoint) -> BoundedReal {
        BoundedReal {
            value: circle_norm(&(&self.value - &other.value)),
            err: &self.err + &other.err,
        }
    }

    /// Round the representative to `bits` fractional bits, folding the
    /// truncation into the error bound.
    pub fn round_to_bits(&self, bits: u32) -> CirclePoint {
        let scale = BigInt::one() << bits;
        let num = (&self.value * BigRational::from_integer(scale.clone())).floor().to_integer();
        CirclePoint {
            value: BigRational::new(num, scale.clone()),
            err: &self.err + BigRational::new(BigInt::one(), scale),
        }
    }
}

/// ||r|| = min({r}, 1 - {r}), exact.
pub fn circle_norm(r: &BigRational) -> BigRational {
    let f = frac(r);
    let other = BigRational::one() - &f;
    f.min(other)
}

/// A non-negative real known to absolute accuracy `err`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedReal {
    pub value: BigRational,
    pub err: BigRational,
}

impl BoundedReal {
    pub fn exact(value: BigRational) -> Self {
        BoundedReal { value, err: BigRational::zero() }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.value.is_zero() && self.err.is_zero()
    }

    /// Ternary order against an exact threshold.
    pub fn cmp_rational(&self, t: &BigRational) -> TernaryOrder {
        if &self.value + &self.err < *t {
            TernaryOrder::Less
        } else if &self.value - &self.err > *t {
            TernaryOrder::Greater
        } else {
            TernaryOrder::Indeterminate
        }
    }

    /// Ternary order against an enclosure.
    pub fn cmp_interval(&self, t: &Interval) -> TernaryOrder {
        if &self.value + &self.err < t.lo_rational() {
            TernaryOrder::Less
        } else if &self.value - &self.err > t.hi_rational() {
            TernaryOrder::Greater
        } else {
            TernaryOrder::Indeterminate
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// Wire form: decimal value plus decimal error radius. Deserializing
/// folds the 40-digit truncation into the error bound, so round-trips
/// stay sound (never claim more accuracy than held).
#[derive(Serialize, Deserialize)]
struct CirclePointRepr {
    value: String,
    err: String,
}

impl Serialize for CirclePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CirclePointRepr {
            value: decimal_string(&self.value, 40),
            err: decimal_string(&self.err, 40),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CirclePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = CirclePointRepr::deserialize(d)?;
        let value = parse_decimal(&repr.value)
            .ok_or_else(|| serde::de::Error::custom("bad decimal in circle point value"))?;
        let err = parse_decimal(&repr.err)
            .ok_or_else(|| serde::de::Error::custom("bad decimal in circle point err"))?;
        let truncation = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(40));
        CirclePoint::with_err(value, err + truncation).map_err(serde::de::Error::custom)
    }
}

/// Integer walker along an orbit: positions are numerators over a fixed
/// modulus, so stepping and distance tests are pure integer work.
pub(crate) struct OrbitCursor {
    pos: BigInt,
    step_num: BigInt,
    modulus: BigInt,
}

impl OrbitCursor {
    pub fn new(start: &BigRational, alpha: &BigRational) -> Self {
        let modulus = start.denom().lcm(alpha.denom());
        let pos = (start.numer() * (&modulus / start.denom())).mod_floor(&modulus);
        let step_num = (alpha.numer() * (&modulus / alpha.denom())).mod_floor(&modulus);
        OrbitCursor { pos, step_num, modulus }
    }

    pub fn advance(&mut self) {
        self.pos += &self.step_num;
        if self.pos >= self.modulus {
            self.pos -= &self.modulus;
        }
    }

    pub fn retreat(&mut self) {
        self.pos -= &self.step_num;
        if self.pos.is_negative() {
            self.pos += &self.modulus;
        }
    }

    /// Numerator of the distance to zero (over `modulus`).
    pub fn dist_numerator(&self) -> BigInt {
        (&self.pos).min(&(&self.modulus - &self.pos)).clone()
    }

    pub fn position_numerator(&self) -> &BigInt {
        &self.pos
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.pos.clone(), self.modulus.clone())
    }
}

/// Closest approach between the orbits of x and y over the index window
/// j in (-q_{n_k}, q_{n_k}): min over j of d(x, R^j y), together with a
/// minimizing j (ties: smallest |j|, then the positive one).
///
/// The minimization itself is exact (both points' error radii shift all
/// candidates equally); only the returned distance carries error.
pub fn closest_approach(
    x: &CirclePoint,
    y: &CirclePoint,
    cf: &ContinuedFraction,
    k_index: usize,
) -> (BoundedReal, BigInt) {
    let q = cf.q(k_index).clone();
    let alpha = cf.value();
    // d(x, R^j y) = ||(x - y) - j alpha||.
    let delta = frac(&(x.value() - y.value()));
    let mut fwd = OrbitCursor::new(&delta, &alpha);
    let mut bwd = OrbitCursor::new(&delta, &alpha);
    let mut best_num = fwd.dist_numerator();
    let mut best_j = BigInt::zero();
    let mut j = BigInt::one();
    // Visit j = 1, -1, 2, -2, ...: strict improvement keeps the first
    // minimizer in this order, which is exactly the tie-break rule.
    while j < q {
        // R^j y moves the difference by -j alpha.
        bwd.retreat();
        let d = bwd.dist_numerator();
        if d < best_num {
            best_num = d;
            best_j = j.clone();
        }
        fwd.advance();
        let d = fwd.dist_numerator();
        if d < best_num {
            best_num = d;
            best_j = -j.clone();
        }
        j += 1;
    }
    let dist = BoundedReal {
        value: BigRational::new(best_num, fwd.modulus().clone()),
        err: x.err() + y.err(),
    };
    (dist, best_j)
}

/// Whether y lies on the rotation orbit of x within the given window:
/// exact zero closest approach.
pub fn same_orbit(x: &CirclePoint, y: &CirclePoint, cf: &ContinuedFraction, k_index: usize) -> bool {
    let (d, _) = closest_approach(x, y, cf, k_index);
    d.value.is_zero()
}

/// Gap structure of the finite orbit {x + i alpha : 0 <= i < q_n}.
#[derive(Clone, Debug, Serialize)]
pub struct SpacingReport {
    pub n: usize,
    pub points: u64,
    pub degenerate: bool,
    /// Exact gap values with multiplicities, ascending.
    pub distinct_gaps: Vec<(String, usize)>,
    pub min_gap: String,
    pub max_gap: String,
    /// min pairwise distance >= 1/(2 q_n)
    pub min_ok: bool,
    /// every interval of length 2/q_n meets the orbit
    pub max_ok: bool,
}

/// Exact spacing check. Returns the report; the caller asserts `min_ok`
/// and `max_ok` as needed.
pub fn orbit_spacing_check(x: &CirclePoint, cf: &ContinuedFraction, n: usize) -> SpacingReport {
    let q = cf.q(n).to_u64().expect("spacing checks are for desk-scale q_n");
    let alpha = cf.value();
    let mut cursor = OrbitCursor::new(x.value(), &alpha);
    let modulus = cursor.modulus().clone();
    let mut positions = Vec::with_capacity(q as usize);
    for _ in 0..q {
        positions.push(cursor.position_numerator().clone());
        cursor.advance();
    }
    positions.sort();
    let mut gaps: Vec<BigInt> = positions
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .collect();
    gaps.push(&modulus - positions.last().unwrap() + positions.first().unwrap());
    gaps.sort();
    let mut distinct: Vec<(BigInt, usize)> = Vec::new();
    for g in &gaps {
        match distinct.last_mut() {
            Some((v, c)) if v == g => *c += 1,
            _ => distinct.push((g.clone(), 1)),
        }
    }
    let as_rat = |g: &BigInt| BigRational::new(g.clone(), modulus.clone());
    let min_gap = as_rat(gaps.first().unwrap());
    let max_gap = as_rat(gaps.last().unwrap());
    let q_big = BigInt::from(q);
    let min_ok = &min_gap * BigRational::from_integer(&q_big * 2) >= BigRational::one();
    let max_ok = &max_gap * BigRational::from_integer(q_big) <= BigRational::from_integer(2.into());
    SpacingReport {
        n,
        points: q,
        degenerate: q == 1,
        distinct_gaps: distinct
            .iter()
            .map(|(g, c)| (format!("{}", as_rat(g)), *c))
            .collect(),
        min_gap: format!("{min_gap}"),
        max_gap: format!("{max_gap}"),
        min_ok,
        max_ok,
    }
}

/// The orbit-window exclusion sets. Radii default to the defining
/// formulas; both window and radius can be overridden, because the
/// defining radii only separate from each other at astronomical q_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitSet {
    /// Window i in [-q_n, q_n - 1], excluded radius 1/(q_n ln^{7/8} q_n), open.
    BWindow,
    /// Same window, excluded radius 1/(2 q_n ln^4 q_n), closed.
    OWindow,
    /// Window |i| <= 4 ceil(q_n ln^{1/2} q_n), excluded radius as B, closed.
    EWindow,
    /// Hits of [0, M q_{n+1}] forward orbit on the closed ball of radius
    /// 1/(q_n ln^{7/8} q_n): membership in the bad set.
    SigmaWindow { m: u64 },
    /// At most one hit of [0, q_s) on the closed ball of radius 1/(2 c q_s).
    BadlyApproxWindow { c: u32 },
}

/// Overrides for the set predicates (see `OrbitSet`).
#[derive(Clone, Debug, Default)]
pub struct SetParams {
    pub window: Option<BigInt>,
    pub radius: Option<BigRational>,
}

enum Radius {
    Exact(BigRational),
    Formula(Box<dyn Fn(u32) -> Result<Interval, IntervalError>>),
}

fn member_radius(
    set: OrbitSet,
    cf: &ContinuedFraction,
    n: usize,
    params: &SetParams,
) -> Result<Radius, CircleError> {
    if let Some(r) = &params.radius {
        return Ok(Radius::Exact(r.clone()));
    }
    let q = cf.q(n).clone();
    if q <= BigInt::from(2) && !matches!(set, OrbitSet::BadlyApproxWindow { .. }) {
        return Err(CircleError::Degenerate { n, q: q.to_string() });
    }
    Ok(match set {
        OrbitSet::BWindow | OrbitSet::EWindow | OrbitSet::SigmaWindow { .. } => {
            let qq = q.clone();
            Radius::Formula(Box::new(move |prec| {
                let qi = Interval::from_rational(&BigRational::from_integer(qq.clone()), prec);
                Interval::from_int(1, prec).div(&qi.mul(&qi.ln()?.pow_ratio(7, 8)?))
            }))
        }
        OrbitSet::OWindow => {
            let qq = q.clone();
            Radius::Formula(Box::new(move |prec| {
                let qi = Interval::from_rational(&BigRational::from_integer(qq.clone()), prec);
                let ln4 = qi.ln()?.pow_ratio(4, 1)?;
                Interval::from_int(1, prec).div(&qi.mul(&ln4).mul(&Interval::from_int(2, prec)))
            }))
        }
        OrbitSet::BadlyApproxWindow { c } => {
            Radius::Exact(BigRational::new(BigInt::one(), BigInt::from(2 * c as u64) * q))
        }
    })
}

fn window_len(
    set: OrbitSet,
    cf: &ContinuedFraction,
    n: usize,
    params: &SetParams,
) -> Result<(BigInt, BigInt), CircleError> {
    if let Some(w) = &params.window {
        return Ok(match set {
            OrbitSet::BWindow | OrbitSet::OWindow => (-w.clone(), w - 1),
            OrbitSet::EWindow => (-w.clone(), w.clone()),
            OrbitSet::SigmaWindow { .. } | OrbitSet::BadlyApproxWindow { .. } => {
                (BigInt::zero(), w.clone())
            }
        });
    }
    let q = cf.q(n).clone();
    Ok(match set {
        OrbitSet::BWindow | OrbitSet::OWindow => (-q.clone(), q - 1),
        OrbitSet::EWindow => {
            let w: BigInt = ceil_refined(|prec| {
                let qi = Interval::from_rational(&BigRational::from_integer(q.clone()), prec);
                Ok(qi.mul(&qi.ln()?.pow_ratio(1, 2)?))
            })? * 4;
            (-w.clone(), w)
        }
        OrbitSet::SigmaWindow { m } => (BigInt::zero(), cf.q(n + 1) * m),
        OrbitSet::BadlyApproxWindow { .. } => (BigInt::zero(), q - 1),
    })
}

/// ceil of a positive quantity given by enclosures, refined until pinned.
pub(crate) fn ceil_refined(
    f: impl Fn(u32) -> Result<Interval, IntervalError>,
) -> Result<BigInt, CircleError> {
    let mut last = 0;
    for &prec in &PRECISION_LADDER {
        last = prec;
        let itv = f(prec)?;
        let lo = itv.lo_rational().ceil().to_integer();
        let hi = itv.hi_rational().ceil().to_integer();
        if lo == hi {
            return Ok(lo);
        }
    }
    Err(CircleError::Precision(last))
}

/// Evaluate the defining orbit-window predicate of `set` at x.
pub fn set_membership(
    x: &CirclePoint,
    set: OrbitSet,
    cf: &ContinuedFraction,
    n: usize,
    params: &SetParams,
) -> Result<bool, CircleError> {
    let radius = member_radius(set, cf, n, params)?;
    let (lo_i, hi_i) = window_len(set, cf, n, params)?;
    let alpha = cf.value();
    // Walk the window with an integer cursor; classify each point's
    // distance to zero against the radius enclosure, refining only on
    // contact with the enclosure gap.
    let start = frac(&(x.value() + BigRational::from_integer(lo_i.clone()) * &alpha));
    let mut cursor = OrbitCursor::new(&start, &alpha);
    let modulus = cursor.modulus().clone();
    let err_num = (x.err() * BigRational::from_integer(modulus.clone())).ceil().to_integer();

    // Resolve the radius to exact rational brackets (lo, hi); exact
    // radii collapse the bracket.
    let (mut rad_lo, mut rad_hi, formula) = match &radius {
        Radius::Exact(r) => (r.clone(), r.clone(), None),
        Radius::Formula(f) => {
            let itv = f(PRECISION_LADDER[0])?;
            (itv.lo_rational(), itv.hi_rational(), Some(f))
        }
    };

    // Counters by set semantics.
    let open_exclusion = matches!(set, OrbitSet::BWindow);
    let mut hits: u64 = 0;

    let mut i = lo_i.clone();
    loop {
        let dist = BigRational::new(cursor.dist_numerator(), modulus.clone());
        let dist_lo = &dist - BigRational::new(err_num.clone(), modulus.clone());
        let dist_hi = &dist + BigRational::new(err_num.clone(), modulus.clone());
        // inside means ||point|| < rad (open) or <= rad (closed).
        let mut verdict: Option<bool> = if dist_hi < rad_lo {
            Some(true)
        } else if dist_lo > rad_hi {
            Some(false)
        } else if rad_lo == rad_hi {
            // Exact radius: decide on the boundary by openness.
            Some(if open_exclusion { dist < rad_lo } else { dist <= rad_lo })
        } else {
            None
        };
        if verdict.is_none() {
            if let Some(f) = formula {
                for &prec in PRECISION_LADDER.iter().skip(1) {
                    let itv = f(prec)?;
                    rad_lo = itv.lo_rational();
                    rad_hi = itv.hi_rational();
                    if dist_hi < rad_lo {
                        verdict = Some(true);
                        break;
                    }
                    if dist_lo > rad_hi {
                        verdict = Some(false);
                        break;
                    }
                }
            }
        }
        let inside = verdict.ok_or(CircleError::Precision(
            *PRECISION_LADDER.last().unwrap(),
        ))?;
        if inside {
            hits += 1;
            // Early exits where the verdict is already determined.
            match set {
                OrbitSet::BWindow | OrbitSet::OWindow | OrbitSet::EWindow => return Ok(false),
                OrbitSet::SigmaWindow { .. } => return Ok(true),
                OrbitSet::BadlyApproxWindow { .. } => {
                    if hits > 1 {
                        return Ok(false);
                    }
                }
            }
        }
        if i == hi_i {
            break;
        }
        cursor.advance();
        i += 1;
    }
    Ok(match set {
        OrbitSet::BWindow | OrbitSet::OWindow | OrbitSet::EWindow => true,
        OrbitSet::SigmaWindow { .. } => false,
        OrbitSet::BadlyApproxWindow { .. } => hits <= 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn golden(depth: usize) -> ContinuedFraction {
        ContinuedFraction::from_quotients(vec![1; depth], None).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rotation_is_exact_group_action() {
        let cf = golden(30);
        let alpha = cf.value();
        let x = CirclePoint::exact(rat(1, 3));
        let a = x.rotate(&alpha, &BigInt::from(5)).rotate(&alpha, &BigInt::from(-12));
        let b = x.rotate(&alpha, &BigInt::from(-7));
        assert_eq!(a, b);
        assert_eq!(x.rotate(&alpha, &BigInt::zero()), x);
        assert!(a.is_exact());
    }

    #[test]
    fn golden_q5_rotation_lands_in_stated_bracket() {
        // ||q_5 alpha|| = ||8 alpha|| in (1/21, 1/13), value ~ 0.05573.
        let cf = golden(30);
        let x = CirclePoint::zero().rotate(&cf.value(), &BigInt::from(8));
        let norm = x.norm();
        assert!(norm.err.is_zero());
        assert!(norm.value > rat(1, 21) && norm.value < rat(1, 13), "{}", norm.value);
        assert!((norm.to_f64() - 0.05573).abs() < 5e-5);
    }

    #[test]
    fn norm_basics() {
        assert_eq!(circle_norm(&rat(0, 1)), rat(0, 1));
        assert_eq!(circle_norm(&rat(3, 4)), rat(1, 4));
        assert_eq!(circle_norm(&rat(-1, 3)), rat(1, 3));
        assert_eq!(circle_norm(&rat(7, 2)), rat(1, 2));
    }

    #[test]
    fn closest_approach_same_orbit() {
        let cf = golden(20);
        let alpha = cf.value();
        let x = CirclePoint::exact(rat(2, 7));
        assert_eq!(closest_approach(&x, &x, &cf, 8).1, BigInt::zero());
        assert!(closest_approach(&x, &x, &cf, 8).0.is_exact_zero());
        // y three steps ahead: minimizing j is -3 (d(x, R^-3 y) = 0).
        let y = x.rotate(&alpha, &BigInt::from(3));
        let (d, j) = closest_approach(&x, &y, &cf, 8);
        assert!(d.is_exact_zero());
        assert_eq!(j, BigInt::from(-3));
        assert!(same_orbit(&x, &y, &cf, 8));
    }

    #[test]
    fn closest_approach_symmetry_and_monotonicity() {
        let cf = golden(20);
        let x = CirclePoint::exact(rat(1, 5));
        let y = CirclePoint::exact(rat(355, 1130)); // not on the orbit of x
        let (dxy, jxy) = closest_approach(&x, &y, &cf, 9);
        let (dyx, jyx) = closest_approach(&y, &x, &cf, 9);
        assert_eq!(dxy.value, dyx.value);
        assert_eq!(jxy, -jyx);
        // Larger windows can only improve the minimum.
        let mut last = dxy.value.clone();
        for k in 10..16 {
            let (d, _) = closest_approach(&x, &y, &cf, k);
            assert!(d.value <= last);
            last = d.value;
        }
        assert!(!same_orbit(&x, &y, &cf, 12));
    }

    #[test]
    fn spacing_check_golden_q5_eight_points() {
        // golden q_5 = 8 wants min_gap >= 1/16 and max_gap <= 1/4.
        let cf = golden(30);
        let report = orbit_spacing_check(&CirclePoint::exact(rat(9, 20)), &cf, 5);
        assert_eq!(report.points, 8);
        assert!(report.min_ok && report.max_ok, "{report:?}");
        assert!(report.distinct_gaps.len() <= 3, "{report:?}");
        assert!(!report.degenerate);
    }

    #[test]
    fn spacing_check_degenerate_single_point() {
        let cf = golden(10);
        let report = orbit_spacing_check(&CirclePoint::exact(rat(1, 3)), &cf, 0);
        assert!(report.degenerate);
        assert_eq!(report.points, 1);
        assert!(report.min_ok && report.max_ok);
    }

    #[test]
    fn three_distance_across_random_points_and_cfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cfs = [
            golden(20),
            ContinuedFraction::from_quotients(vec![2; 12], None).unwrap(),
            ContinuedFraction::from_quotients(vec![1, 2, 3, 1, 2, 3, 1, 2, 3, 1], None).unwrap(),
            ContinuedFraction::from_quotients(vec![5, 1, 1, 4, 2, 1, 6, 1], None).unwrap(),
        ];
        for cf in &cfs {
            for _ in 0..8 {
                let x = CirclePoint::exact(stats::sample_unit_rational(&mut rng));
                for n in 1..=cf.depth().min(9) {
                    let r = orbit_spacing_check(&x, cf, n);
                    assert!(r.min_ok && r.max_ok, "spacing failed: {r:?}");
                    assert!(r.distinct_gaps.len() <= 3, "gap count: {r:?}");
                    // When there are three gap values the largest is the
                    // sum of the other two.
                    if r.distinct_gaps.len() == 3 {
                        let g: Vec<BigRational> = r
                            .distinct_gaps
                            .iter()
                            .map(|(s, _)| {
                                let parts: Vec<&str> = s.split('/').collect();
                                rat(parts[0].parse().unwrap(), parts.get(1).map_or(1, |d| d.parse().unwrap()))
                            })
                            .collect();
                        assert_eq!(g[2], &g[0] + &g[1], "{r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_images_stay_uniform() {
        // Push 10^4 uniform points through a long rotation and KS-test
        // the image; rotation preserves Lebesgue measure.
        let cf = golden(30);
        let alpha = cf.value();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut images = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            let x = CirclePoint::exact(stats::sample_unit_rational(&mut rng));
            images.push(x.rotate(&alpha, &BigInt::from(377)).to_f64());
        }
        let p = stats::ks_uniform_p_value(&images);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn b_window_excludes_center_and_admits_sampled_points() {
        let cf = golden(25);
        let n = 10; // q_10 = 89
        let params = SetParams::default();
        // x = 0 is the center of the excluded interval (i = 0 hits).
        assert!(!set_membership(&CirclePoint::zero(), OrbitSet::BWindow, &cf, n, &params).unwrap());
        // Members exist in bulk (the window excludes ~2/ln^{7/8}q of the
        // circle); rejection sampling must find one quickly.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut found = 0;
        for _ in 0..40 {
            let x = CirclePoint::exact(stats::sample_unit_rational(&mut rng));
            if set_membership(&x, OrbitSet::BWindow, &cf, n, &params).unwrap() {
                found += 1;
            }
        }
        assert!(found >= 4, "only {found}/40 sampled points were members");
    }

    #[test]
    fn sigma_window_is_monotone_in_m() {
        let cf = golden(22);
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..12 {
            let x = CirclePoint::exact(stats::sample_unit_rational(&mut rng));
            let in1 = set_membership(&x, OrbitSet::SigmaWindow { m: 1 }, &cf, n, &SetParams::default()).unwrap();
            let in3 = set_membership(&x, OrbitSet::SigmaWindow { m: 3 }, &cf, n, &SetParams::default()).unwrap();
            assert!(!in1 || in3, "Sigma(1) must be contained in Sigma(3)");
        }
    }

    #[test]
    fn badly_approx_window_holds_for_golden() {
        let cf = golden(16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in 3..=10 {
            for _ in 0..6 {
                let x = CirclePoint::exact(stats::sample_unit_rational(&mut rng));
                let ok = set_membership(
                    &x,
                    OrbitSet::BadlyApproxWindow { c: 2 },
                    &cf,
                    s,
                    &SetParams::default(),
                )
                .unwrap();
                assert!(ok, "two hits in a q_{s} window");
            }
        }
    }

    #[test]
    fn set_membership_respects_overrides() {
        let cf = golden(25);
        let n = 10;
        // Huge radius excludes everything.
        let all = SetParams { window: None, radius: Some(rat(2, 3)) };
        assert!(!set_membership(&CirclePoint::exact(rat(1, 178)), OrbitSet::BWindow, &cf, n, &all).unwrap());
        // Zero-length window (single point i = -q_n... override w = 1 gives i in [-1, 0]).
        let narrow = SetParams { window: Some(BigInt::one()), radius: Some(rat(1, 1000)) };
        let member = set_membership(&CirclePoint::exact(rat(1, 2)), OrbitSet::BWindow, &cf, n, &narrow).unwrap();
        assert!(member);
    }

    #[test]
    fn degenerate_indices_are_rejected() {
        let cf = golden(10);
        let r = set_membership(&CirclePoint::zero(), OrbitSet::BWindow, &cf, 1, &SetParams::default());
        assert!(matches!(r, Err(CircleError::Degenerate { .. })));
    }

    #[test]
    fn err_cap_and_serde_round_trip() {
        assert!(CirclePoint::with_err(rat(1, 3), rat(1, 65536)).is_err());
        assert!(CirclePoint::with_err(rat(1, 3), rat(-1, 200000)).is_err());
        let x = CirclePoint::with_err(rat(1, 3), rat(1, 1 << 20)).unwrap();
        let json = serde_json::to_string(&x).unwrap();
        assert!(json.contains("\"value\""));
        let back: CirclePoint = serde_json::from_str(&json).unwrap();
        // The round trip may widen err (decimal truncation) but must
        // keep the true point covered.
        let dist = (back.value() - x.value()).abs();
        assert!(dist <= back.err() - x.err() + rat(1, 1 << 20) + x.err());
        assert!(back.err() >= x.err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rotate_additivity(a in 1i64..200, b in -200i64..200, num in 0i64..997, j1 in -50i64..50, j2 in -50i64..50) {
            let alpha = rat(a, 997);
            let x = CirclePoint::exact(rat(num, 997));
            let _ = b;
            let lhs = x.rotate(&alpha, &BigInt::from(j1)).rotate(&alpha, &BigInt::from(j2));
            let rhs = x.rotate(&alpha, &BigInt::from(j1 + j2));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn norm_symmetry(num in 0i64..4096) {
            let r = rat(num, 4096);
            prop_assert_eq!(circle_norm(&r), circle_norm(&-r.clone()));
            prop_assert!(circle_norm(&r) <= rat(1, 2));
        }

        #[test]
        fn cursor_matches_rational_walk(a in 1i64..500, d in 501i64..999, n0 in 0i64..100, steps in 1usize..60) {
            let alpha = rat(a, d);
            let start = rat(n0, 101);
            let mut cursor = OrbitCursor::new(&start, &alpha);
            let mut value = start;
            for _ in 0..steps {
                cursor.advance();
                value = frac(&(value + alpha.clone()));
                prop_assert_eq!(cursor.to_rational(), value.clone());
            }
        }
    }
}
