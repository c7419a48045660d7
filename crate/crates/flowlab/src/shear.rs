//! Pair geometry over the rotation and the two shearing analyses: the
//! class of a pair (small / close / type I / type II) read off its orbit
//! distance, the search for an iterate count l0*q_m whose Birkhoff
//! difference lands in the compact target set P, the stability of that
//! landing under shifts of both base points, and the direct two-sided
//! bounds on |f^(q_r)(x) - f^(q_r)(y)| for the non-good classes.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::circle::{
    closest_approach, frac, set_membership, BoundedReal, CircleError, CirclePoint, OrbitCursor,
    OrbitSet, SetParams,
};
use crate::interval::{Interval, IntervalError};
use crate::numeration::{ContinuedFraction, NumerationError, PRECISION_LADDER};
use crate::roof::{birkhoff_sum, roof_eval, EvalContext, RoofError, RoofFunction};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ShearError {
    #[error("pair is {class}, but the analysis needs a good (small or close) pair")]
    NotGoodPair { class: &'static str },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("quotient depth {depth} is too shallow (index {needed} needed)")]
    InsufficientDepth { needed: usize, depth: usize },
    #[error("q_{n} = {q} is too small for the class thresholds")]
    Degenerate { n: usize, q: String },
    #[error("class boundary undecided at {0} bits")]
    Precision(u32),
    #[error(transparent)]
    Roof(#[from] RoofError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error(transparent)]
    Numeration(#[from] NumerationError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// The constants steering both shearing analyses, all exact rationals
/// derived from the roof's log coefficients (and, for `h_hat`, from the
/// rotation number).
#[derive(Clone, Debug)]
pub struct ShearConstants {
    pub h: BigRational,
    /// Closed negative component of P: [-2H-2, -H/200].
    pub p_neg: (BigRational, BigRational),
    /// Closed positive component of P: [H/200, 2H+2].
    pub p_pos: (BigRational, BigRational),
    pub h_hat: BigRational,
    pub d1: BigRational,
    pub d2: BigRational,
}

impl ShearConstants {
    pub fn derive(f: &RoofFunction, cf: &ContinuedFraction) -> ShearConstants {
        let gap = f.a_minus() - f.a_plus();
        let cent = BigRational::new(BigInt::one(), BigInt::from(100));
        let h = &gap - (&gap / BigRational::from_integer(10.into())).min(cent);
        let two_h_plus_2 = BigRational::from_integer(2.into()) * &h + BigRational::from_integer(2.into());
        let h_200 = &h / BigRational::from_integer(200.into());

        // h_hat caps the divergence target from below by the smallest
        // rotation distance reachable within (2H+3)/a steps.
        let steps = ((BigRational::from_integer(2.into()) * &h + BigRational::from_integer(3.into()))
            / f.floor())
        .floor()
        .to_integer()
            + BigInt::one();
        let alpha = cf.value();
        let mut cursor = OrbitCursor::new(&frac(&alpha), &alpha);
        let modulus = cursor.modulus().clone();
        let mut min_num = cursor.dist_numerator();
        let mut k = BigInt::one();
        while k < steps {
            cursor.advance();
            let d = cursor.dist_numerator();
            if d < min_num {
                min_num = d;
            }
            k += 1;
        }
        let h_hat = h_200.clone().min(BigRational::new(min_num, modulus));

        let d1 = &h * BigRational::new(99.into(), 100.into());
        let d2 = BigRational::from_integer(2.into())
            * (&gap + &h / BigRational::from_integer(50.into()));
        ShearConstants {
            h,
            p_neg: (-two_h_plus_2.clone(), -h_200.clone()),
            p_pos: (h_200, two_h_plus_2),
            h_hat,
            d1,
            d2,
        }
    }

    pub fn p_contains(&self, v: &BigRational) -> bool {
        (&self.p_neg.0 <= v && v <= &self.p_neg.1) || (&self.p_pos.0 <= v && v <= &self.p_pos.1)
    }

    /// Nearest point of P (ties at zero resolve to the positive side).
    pub fn clamp_to_p(&self, v: &BigRational) -> BigRational {
        if v > &self.p_pos.1 {
            self.p_pos.1.clone()
        } else if v >= &self.p_pos.0 {
            v.clone()
        } else if !v.is_negative() {
            self.p_pos.0.clone()
        } else if v > &self.p_neg.1 {
            self.p_neg.1.clone()
        } else if v >= &self.p_neg.0 {
            v.clone()
        } else {
            self.p_neg.0.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    Small,
    Close,
    TypeI,
    TypeII,
    SameOrbit,
    Unclassified,
}

impl PairClass {
    pub fn name(&self) -> &'static str {
        match self {
            PairClass::Small => "small",
            PairClass::Close => "close",
            PairClass::TypeI => "type_I",
            PairClass::TypeII => "type_II",
            PairClass::SameOrbit => "same_orbit",
            PairClass::Unclassified => "unclassified",
        }
    }

    pub fn is_good(&self) -> bool {
        matches!(self, PairClass::Small | PairClass::Close)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShearDirection {
    Forward,
    Backward,
}

/// Everything the small-shearing search learns about one pair. On
/// failure (`success` false) the fields describe the best attempt.
#[derive(Clone, Debug)]
pub struct SmallShearOutcome {
    pub ell0: BigInt,
    pub m: usize,
    pub p: BigRational,
    /// Certified upper bound on |f^(l0 q_m)(x) - f^(l0 q_m)(y) - p|.
    pub residual: BigRational,
    pub direction: ShearDirection,
    pub success: bool,
    /// The Birkhoff difference behind `p` (kept for re-verification).
    pub difference: Scalar,
    pub ell_cap: BigInt,
    pub attempts: u64,
    /// Orbit-window memberships behind the lemma's hypotheses, reported
    /// rather than enforced: the verbatim windows are empty at any
    /// reachable scale.
    pub x_window_ok: bool,
    pub y_membership_ok: bool,
}

/// Outcome of the direct Birkhoff-difference bounds at q_r.
#[derive(Clone, Debug)]
pub struct LargeShearOutcome {
    pub r: usize,
    pub pair_class: PairClass,
    /// Enclosure of |f^(q_r)(x) - f^(q_r)(y)|.
    pub delta: Scalar,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// Indices 0 <= i < q_r where the arc [x+ia, y+j0*a+ia] straddles
    /// the singularity.
    pub straddle_count: usize,
    /// Distance between the direct sum and its head/carry decomposition
    /// (midpoints), with the combined error it must stay below.
    pub decomposition_gap: BigRational,
    pub combined_err: BigRational,
}

/// One pair's classification record; the analysis slots start empty and
/// are filled by whichever check the caller runs.
#[derive(Clone, Debug)]
pub struct PairReport {
    pub d_k: BoundedReal,
    pub j0: BigInt,
    pub order_k: usize,
    pub pair_class: PairClass,
    pub shear: Option<SmallShearOutcome>,
    pub large: Option<LargeShearOutcome>,
}

/// A threshold of the class table: exact rational or 1/(q log q).
enum ClassBound {
    Exact(BigRational),
    InvQLogQ(BigInt),
}

fn inv_q_log_q(q: &BigInt, prec: u32) -> Result<Interval, IntervalError> {
    let qi = Interval::from_rational(&BigRational::from_integer(q.clone()), prec);
    Interval::from_int(1, prec).div(&qi.mul(&qi.ln()?))
}

/// Ordering of the (error-widened) distance against a class bound.
fn cmp_bound(d: &BoundedReal, bound: &ClassBound) -> Result<Ordering, ShearError> {
    let lo = &d.value - &d.err;
    let hi = &d.value + &d.err;
    match bound {
        ClassBound::Exact(t) => {
            if d.err.is_zero() {
                Ok(d.value.cmp(t))
            } else if &hi < t {
                Ok(Ordering::Less)
            } else if &lo > t {
                Ok(Ordering::Greater)
            } else {
                Err(ShearError::Precision(0))
            }
        }
        ClassBound::InvQLogQ(q) => {
            let mut last = 0;
            for &prec in &PRECISION_LADDER {
                last = prec;
                let itv = inv_q_log_q(q, prec)?;
                if hi < itv.lo_rational() {
                    return Ok(Ordering::Less);
                }
                if lo > itv.hi_rational() {
                    return Ok(Ordering::Greater);
                }
            }
            Err(ShearError::Precision(last))
        }
    }
}

fn five_sixths_q(q: &BigInt) -> BigRational {
    BigRational::new(BigInt::from(5), BigInt::from(6) * q)
}

/// Read the pair's class off d_k at the given order. The small/close
/// table leaves deliberate overlaps at shared boundary points; the
/// priority small > close > type I > type II resolves them, and any
/// distance the four ranges miss is reported as unclassified.
pub fn classify_pair(
    x: &CirclePoint,
    y: &CirclePoint,
    cf: &ContinuedFraction,
    order_k: usize,
) -> Result<PairReport, ShearError> {
    if order_k + 1 > cf.depth() {
        return Err(ShearError::InsufficientDepth { needed: order_k + 1, depth: cf.depth() });
    }
    let q_k = cf.q(order_k).clone();
    if q_k < BigInt::from(2) {
        return Err(ShearError::Degenerate { n: order_k, q: q_k.to_string() });
    }
    let q_k1 = cf.q(order_k + 1).clone();
    let (d, j0) = closest_approach(x, y, cf, order_k);

    let mut report = PairReport {
        d_k: d.clone(),
        j0,
        order_k,
        pair_class: PairClass::Unclassified,
        shear: None,
        large: None,
    };
    if d.is_exact_zero() {
        report.pair_class = PairClass::SameOrbit;
        return Ok(report);
    }
    if d.value <= d.err {
        return Err(ShearError::Precision(0));
    }

    let t_small = ClassBound::InvQLogQ(q_k1.clone());
    let t_big = ClassBound::InvQLogQ(q_k.clone());
    let close_lo = ClassBound::Exact(five_sixths_q(&q_k1));
    let type1_hi = ClassBound::Exact(five_sixths_q(&q_k));

    report.pair_class = if cmp_bound(&d, &t_small)? != Ordering::Greater {
        PairClass::Small
    } else if cmp_bound(&d, &close_lo)? != Ordering::Less && cmp_bound(&d, &t_big)? == Ordering::Less
    {
        PairClass::Close
    } else if cmp_bound(&d, &t_big)? != Ordering::Less
        && cmp_bound(&d, &type1_hi)? != Ordering::Greater
    {
        PairClass::TypeI
    } else if cmp_bound(&d, &t_small)? != Ordering::Less
        && cmp_bound(&d, &close_lo)? != Ordering::Greater
    {
        PairClass::TypeII
    } else {
        PairClass::Unclassified
    };
    Ok(report)
}

/// The scale the divergence analysis runs at: the unique m with
/// 1/(q_{m+1} log q_{m+1}) <= d_k < 1/(q_m log q_m).
fn divergence_scale(
    d: &BoundedReal,
    cf: &ContinuedFraction,
    order_k: usize,
) -> Result<usize, ShearError> {
    let mut m = order_k;
    loop {
        if m + 1 > cf.depth() {
            return Err(ShearError::InsufficientDepth { needed: m + 1, depth: cf.depth() });
        }
        let below_here = cmp_bound(d, &ClassBound::InvQLogQ(cf.q(m).clone()))? == Ordering::Less;
        let below_next =
            cmp_bound(d, &ClassBound::InvQLogQ(cf.q(m + 1).clone()))? == Ordering::Less;
        if below_here && !below_next {
            return Ok(m);
        }
        m += 1;
    }
}

/// Minimal distance numerator to the singularity over an orbit window
/// of x: j in [0, len] stepping forward, or j in [1, len] backward.
fn window_clearance(x: &BigRational, alpha: &BigRational, len: &BigInt, forward: bool) -> BigRational {
    let mut cursor = OrbitCursor::new(&frac(x), alpha);
    let modulus = cursor.modulus().clone();
    let mut min_num = if forward {
        cursor.dist_numerator()
    } else {
        cursor.retreat();
        cursor.dist_numerator()
    };
    let mut j = BigInt::one();
    while &j < len {
        if forward {
            cursor.advance();
        } else {
            cursor.retreat();
        }
        let d = cursor.dist_numerator();
        if d < min_num {
            min_num = d;
        }
        j += 1;
    }
    BigRational::new(min_num, modulus)
}

/// Scan l = 1..cap (signed by the chosen direction) for an iterate count
/// l*q_m whose Birkhoff difference lands within `zeta` of the compact
/// set P. Failure to land is reported, not raised; only evaluation
/// errors (singular terms) abort.
pub fn small_shearing_search(
    f: &RoofFunction,
    x: &CirclePoint,
    y: &CirclePoint,
    cf: &ContinuedFraction,
    order_k: usize,
    zeta: &BigRational,
    ctx: &EvalContext,
) -> Result<SmallShearOutcome, ShearError> {
    let report = classify_pair(x, y, cf, order_k)?;
    if !report.pair_class.is_good() {
        return Err(ShearError::NotGoodPair { class: report.pair_class.name() });
    }
    let constants = ShearConstants::derive(f, cf);
    let m = divergence_scale(&report.d_k, cf, order_k)?;
    let q_m = cf.q(m).clone();
    let q_m1 = cf.q(m + 1).clone();
    let alpha = cf.value();

    // Direction: compare how close each orbit window of x comes to the
    // singularity and walk the clearer side (ties go forward).
    let window = (&q_m1 / BigInt::from(8)).max(q_m.clone());
    let fwd_clear = window_clearance(x.value(), &alpha, &window, true);
    let bwd_clear = window_clearance(x.value(), &alpha, &window, false);
    let direction = if fwd_clear >= bwd_clear {
        ShearDirection::Forward
    } else {
        ShearDirection::Backward
    };

    let x_window_ok = set_membership(x, OrbitSet::BWindow, cf, m, &SetParams::default())?;
    let y_membership_ok = set_membership(y, OrbitSet::EWindow, cf, order_k, &SetParams::default())?;

    let ell_cap = (&q_m1 / (BigInt::from(16) * &q_m)).max(BigInt::one());
    let sign = match direction {
        ShearDirection::Forward => BigInt::one(),
        ShearDirection::Backward => -BigInt::one(),
    };

    let mut best: Option<SmallShearOutcome> = None;
    let mut attempts = 0u64;
    let mut l = BigInt::one();
    while l <= ell_cap {
        attempts += 1;
        let ell = &sign * &l;
        let count = &ell * &q_m;
        let dx = birkhoff_sum(f, x, &count, &alpha, ctx)?.value;
        let dy = birkhoff_sum(f, y, &count, &alpha, ctx)?.value;
        let difference = dx.sub(&dy);
        let mid = difference.as_interval(ctx.prec).mid_rational();
        let p = constants.clamp_to_p(&mid);
        let residual = difference
            .sub(&Scalar::Exact(p.clone()))
            .abs()
            .as_interval(ctx.prec)
            .hi_rational();
        let success = &residual <= zeta;
        let outcome = SmallShearOutcome {
            ell0: ell,
            m,
            p,
            residual,
            direction,
            success,
            difference,
            ell_cap: ell_cap.clone(),
            attempts,
            x_window_ok,
            y_membership_ok,
        };
        if success {
            return Ok(outcome);
        }
        if best.as_ref().map_or(true, |b| outcome.residual < b.residual) {
            best = Some(outcome);
        }
        l += 1;
    }
    let mut failed = best.expect("cap is at least one, so at least one attempt ran");
    failed.attempts = attempts;
    Ok(failed)
}

/// Prefix sums of the roof along z, z+step, z+2*step, ...; singular
/// terms poison exactly the windows that contain them.
struct ShiftTable {
    base: i64,
    prefix: Vec<Scalar>,
    poisoned: Vec<u32>,
}

impl ShiftTable {
    fn build(
        f: &RoofFunction,
        z: &CirclePoint,
        step: &BigRational,
        base: i64,
        count: usize,
        ctx: &EvalContext,
    ) -> Result<ShiftTable, ShearError> {
        let start = frac(&(z.value() + BigRational::from_integer(base.into()) * step));
        let mut cursor = OrbitCursor::new(&start, step);
        let mut prefix = Vec::with_capacity(count + 1);
        let mut poisoned = Vec::with_capacity(count + 1);
        prefix.push(Scalar::zero());
        poisoned.push(0u32);
        for i in 0..count {
            let pos = cursor.to_rational();
            let point = CirclePoint::with_err(pos, z.err().clone())
                .map_err(|e| ShearError::Precondition(e.to_string()))?;
            match roof_eval(f, &point, ctx) {
                Ok(v) => {
                    prefix.push(prefix[i].add(&v));
                    poisoned.push(poisoned[i]);
                }
                Err(RoofError::Singular { .. }) => {
                    prefix.push(prefix[i].clone());
                    poisoned.push(poisoned[i] + 1);
                }
                Err(e) => return Err(e.into()),
            }
            cursor.advance();
        }
        Ok(ShiftTable { base, prefix, poisoned })
    }

    /// Sum of `len` consecutive terms starting at shift index `from`;
    /// None when the window holds a singular term.
    fn window(&self, from: i64, len: u64) -> Option<Scalar> {
        let lo = usize::try_from(from - self.base).ok()?;
        let hi = lo.checked_add(len as usize)?;
        if hi >= self.prefix.len() {
            return None;
        }
        if self.poisoned[hi] > self.poisoned[lo] {
            return None;
        }
        Some(self.prefix[hi].sub(&self.prefix[lo]))
    }
}

#[derive(Clone, Debug)]
pub struct PreservationReport {
    pub fraction: f64,
    pub passed: u64,
    pub skipped: u64,
    pub total: u64,
}

/// Largest b with b^5 <= v.
fn fifth_root_floor(v: &BigInt) -> BigInt {
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one();
    while hi.pow(5) <= *v {
        hi = &hi * 2;
    }
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / 2;
        if mid.pow(5) <= *v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Sample shifted pairs (x+ia, y+ja) with i up to |l0 q_m| and
/// |i-j| <= 10 |l0 q_m|^(1/5), and count how often the Birkhoff
/// difference stays within zeta of the outcome's p. Windows touching a
/// singular term are skipped and tallied.
#[allow(clippy::too_many_arguments)]
pub fn shearing_preservation_check(
    f: &RoofFunction,
    x: &CirclePoint,
    y: &CirclePoint,
    cf: &ContinuedFraction,
    outcome: &SmallShearOutcome,
    zeta: &BigRational,
    samples: u64,
    seed: u64,
    ctx: &EvalContext,
) -> Result<PreservationReport, ShearError> {
    if !outcome.success {
        return Err(ShearError::Precondition(
            "preservation check needs a successful search outcome".into(),
        ));
    }
    let count = &outcome.ell0 * cf.q(outcome.m);
    let n = count
        .abs()
        .to_i64()
        .ok_or_else(|| ShearError::Precondition("iterate window too large to sample".into()))?;
    // 10 * n^(1/5), exactly: floor of the fifth root of 10^5 * n.
    let b = fifth_root_floor(&(BigInt::from(100_000) * BigInt::from(n)))
        .to_i64()
        .expect("bound fits");
    let alpha = cf.value();
    let forward = outcome.ell0.is_positive();
    let step = if forward { alpha.clone() } else { frac(&-&alpha) };

    // Shift tables make each sample an O(1) prefix difference. The x
    // windows start at i in [0, n]; the y windows at j in [-b, n+b].
    let x_table = ShiftTable::build(f, x, &step, 0, (2 * n) as usize, ctx)?;
    let y_table = ShiftTable::build(f, y, &step, -b, (2 * n + 2 * b) as usize, ctx)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0u64;
    let mut skipped = 0u64;
    for _ in 0..samples {
        let i = (rng.next_u64() % (n as u64 + 1)) as i64;
        let j = i + (rng.next_u64() % (2 * b as u64 + 1)) as i64 - b;
        let (wx, wy) = (x_table.window(i, n as u64), y_table.window(j, n as u64));
        let (sx, sy) = match (wx, wy) {
            (Some(a), Some(bv)) => (a, bv),
            _ => {
                skipped += 1;
                continue;
            }
        };
        // The tables sum f along +/- alpha from the shifted points; for
        // the backward direction that is -f^(l0 q_m).
        let mut diff = sx.sub(&sy);
        if !forward {
            diff = diff.neg();
        }
        let residual = diff
            .sub(&Scalar::Exact(outcome.p.clone()))
            .abs()
            .as_interval(ctx.prec)
            .hi_rational();
        if &residual <= zeta {
            passed += 1;
        }
    }
    let evaluated = samples - skipped;
    Ok(PreservationReport {
        fraction: if evaluated == 0 { 0.0 } else { passed as f64 / evaluated as f64 },
        passed,
        skipped,
        total: samples,
    })
}

/// Count the window indices whose pair of orbit points straddles the
/// singularity, walking both orbits over a common denominator.
fn straddle_count(
    x: &BigRational,
    y_shifted: &BigRational,
    alpha: &BigRational,
    q_r: &BigInt,
) -> usize {
    let modulus = x
        .denom()
        .lcm(y_shifted.denom())
        .lcm(alpha.denom());
    let norm = |v: &BigRational| -> BigInt {
        (v.numer() * (&modulus / v.denom())).mod_floor(&modulus)
    };
    let step = norm(alpha);
    let mut px = norm(&frac(x));
    let mut py = norm(&frac(y_shifted));
    let mut hits = 0usize;
    let mut i = BigInt::zero();
    while &i < q_r {
        let d = (&px - &py).abs();
        let wrapped = &d * 2 > modulus;
        if wrapped || px.is_zero() || py.is_zero() {
            hits += 1;
        }
        px = (&px + &step).mod_floor(&modulus);
        py = (&py + &step).mod_floor(&modulus);
        i += 1;
    }
    hits
}

/// Direct two-sided check of the Birkhoff-difference divergence at the
/// class's own scale: r = n_k for type I, n_k + 1 for type II. The
/// orbit-window memberships of both points are genuine preconditions
/// here; pass `e_params` to run them at a reachable radius.
pub fn large_shearing_check(
    f: &RoofFunction,
    x: &CirclePoint,
    y: &CirclePoint,
    cf: &ContinuedFraction,
    order_k: usize,
    e_params: &SetParams,
    ctx: &EvalContext,
) -> Result<LargeShearOutcome, ShearError> {
    let report = classify_pair(x, y, cf, order_k)?;
    let r = match report.pair_class {
        PairClass::TypeI => order_k,
        PairClass::TypeII => order_k + 1,
        other => {
            return Err(ShearError::Precondition(format!(
                "pair is {}, large shearing needs type I or type II",
                other.name()
            )))
        }
    };
    for (point, label, n) in [
        (x, "x", order_k),
        (x, "x", order_k + 1),
        (y, "y", order_k),
    ] {
        if !set_membership(point, OrbitSet::EWindow, cf, n, e_params)? {
            return Err(ShearError::Precondition(format!(
                "{label} fails the orbit-window membership at index {n}"
            )));
        }
    }

    let alpha = cf.value();
    let q_r = cf.q(r).clone();
    let dx = birkhoff_sum(f, x, &q_r, &alpha, ctx)?.value;
    let dy = birkhoff_sum(f, y, &q_r, &alpha, ctx)?.value;
    let direct = dx.sub(&dy);

    // Decomposed path: difference against the aligned orbit point plus
    // the carry sum picked up by sliding y across j0 steps.
    let y_shift = frac(&(y.value() + BigRational::from_integer(report.j0.clone()) * &alpha));
    let y_aligned = CirclePoint::with_err(y_shift.clone(), y.err().clone())
        .map_err(|e| ShearError::Precondition(e.to_string()))?;
    let head = dx.sub(&birkhoff_sum(f, &y_aligned, &q_r, &alpha, ctx)?.value);
    let mut carry = Scalar::zero();
    if !report.j0.is_zero() {
        let (from, to) = if report.j0.is_positive() {
            (BigInt::zero(), report.j0.clone())
        } else {
            (report.j0.clone(), BigInt::zero())
        };
        let mut i = from;
        while i < to {
            let base = frac(&(y.value() + BigRational::from_integer(i.clone()) * &alpha));
            let ahead = frac(&(&base + BigRational::from_integer(q_r.clone()) * &alpha));
            let near = roof_eval(f, &CirclePoint::exact(ahead), ctx)?;
            let here = roof_eval(f, &CirclePoint::exact(base), ctx)?;
            carry = carry.add(&near.sub(&here));
            i += 1;
        }
    }
    let decomposed = head.add(&carry);
    let gap_itv = direct.sub(&decomposed).as_interval(ctx.prec);
    let decomposition_gap = gap_itv.mid_rational().abs();
    let combined_err = direct
        .err_rational()
        + decomposed.err_rational();

    let delta = direct.abs();
    let constants = ShearConstants::derive(f, cf);
    let delta_itv = delta.as_interval(ctx.prec);
    let lower_ok = delta_itv.lo_rational() >= constants.d1;
    let log_qr = Interval::from_rational(&BigRational::from_integer(q_r.clone()), ctx.prec).ln()?;
    let upper_ok = delta_itv.hi_rational() <= log_qr.mul_rational(&constants.d2).lo_rational();

    let straddles = straddle_count(x.value(), &y_shift, &alpha, &q_r);

    Ok(LargeShearOutcome {
        r,
        pair_class: report.pair_class,
        delta,
        lower_ok,
        upper_ok,
        straddle_count: straddles,
        decomposition_gap,
        combined_err,
    })
}
