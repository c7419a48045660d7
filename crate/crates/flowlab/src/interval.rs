//! Arbitrary-precision dyadic interval arithmetic.
//!
//! An [`Interval`] is an enclosure `[lo, hi] * 2^-prec` with `BigInt`
//! endpoints at a fixed binary scale. Addition and subtraction of
//! aligned intervals are exact; multiplication, division, `ln`, `exp`
//! and rational powers round outward. Every operation preserves
//! containment: if the inputs enclose exact reals, the output encloses
//! the exact result. Transcendental kernels run at `prec + GUARD` bits
//! internally and widen by an explicit error budget counted in ulps.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Extra working bits for transcendental kernels.
const GUARD: u32 = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntervalError {
    #[error("logarithm of a non-positive enclosure (lo = {0})")]
    LnNonPositive(String),
    #[error("division by an enclosure containing zero")]
    DivByZero,
    #[error("exp argument out of supported range (|x| <= {MAX_EXP_ARG})")]
    ExpRange,
}

/// Largest magnitude accepted by [`Interval::exp`].
const MAX_EXP_ARG: i64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

impl Interval {
    pub fn new(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Interval::new(BigInt::zero(), BigInt::zero(), prec)
    }

    /// Tightest enclosure of an exact rational at `prec` fractional bits.
    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let scaled_num = r.numer() << prec;
        let lo = scaled_num.div_floor(r.denom());
        let hi = div_ceil(&scaled_num, r.denom());
        Interval::new(lo, hi, prec)
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        let v = BigInt::from(n) << prec;
        Interval::new(v.clone(), v, prec)
    }

    /// The symmetric enclosure [-r, r] (outward at `prec`); handy for
    /// folding an absolute error bound into a value.
    pub fn centered_pad(r: &BigRational, prec: u32) -> Self {
        let mag = r.abs();
        let scaled_num = mag.numer() << prec;
        let hi = div_ceil(&scaled_num, mag.denom());
        Interval::new(-hi.clone(), hi, prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.prec)
    }

    pub fn hi_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.prec)
    }

    pub fn mid_rational(&self) -> BigRational {
        BigRational::new(&self.lo + &self.hi, BigInt::one() << (self.prec + 1))
    }

    /// Width in units of 2^-prec.
    pub fn width_ulps(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn width_rational(&self) -> BigRational {
        BigRational::new(self.width_ulps(), BigInt::one() << self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid_rational().to_f64().unwrap_or(f64::NAN)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        &self.lo_rational() <= r && r <= &self.hi_rational()
    }

    /// Re-scale to `prec` fractional bits, rounding outward if shrinking.
    pub fn round_to(&self, prec: u32) -> Interval {
        if prec >= self.prec {
            let s = prec - self.prec;
            Interval::new(&self.lo << s, &self.hi << s, prec)
        } else {
            let s = (self.prec - prec) as usize;
            Interval::new(&self.lo >> s, shr_ceil(&self.hi, s), prec)
        }
    }

    fn aligned(&self, other: &Interval) -> (Interval, Interval) {
        let p = self.prec.max(other.prec);
        (self.round_to(p), other.round_to(p))
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let (a, b) = self.aligned(other);
        Interval::new(a.lo + b.lo, a.hi + b.hi, a.prec)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let (a, b) = self.aligned(other);
        Interval::new(a.lo - b.hi, a.hi - b.lo, a.prec)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo, self.prec)
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && !self.hi.is_negative() {
            let m = (-&self.lo).max(self.hi.clone());
            Interval::new(BigInt::zero(), m, self.prec)
        } else if self.hi.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let (a, b) = self.aligned(other);
        let p = a.prec;
        let cands = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let lo = cands.iter().min().unwrap() >> (p as usize);
        let hi = shr_ceil(cands.iter().max().unwrap(), p as usize);
        Interval::new(lo, hi, p)
    }

    /// Multiply by an exact rational (tighter than going through `mul`).
    pub fn mul_rational(&self, r: &BigRational) -> Interval {
        let (a, b) = if r.is_negative() {
            (&self.hi, &self.lo)
        } else {
            (&self.lo, &self.hi)
        };
        let lo = (a * r.numer()).div_floor(r.denom());
        let hi = div_ceil(&(b * r.numer()), r.denom());
        Interval::new(lo, hi, self.prec)
    }

    pub fn div(&self, other: &Interval) -> Result<Interval, IntervalError> {
        let (a, b) = self.aligned(other);
        if b.contains_zero() {
            return Err(IntervalError::DivByZero);
        }
        let p = a.prec;
        let num_lo = &a.lo << p;
        let num_hi = &a.hi << p;
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for num in [&num_lo, &num_hi] {
            for den in [&b.lo, &b.hi] {
                let f = num.div_floor(den);
                let c = div_ceil(num, den);
                lo = Some(match lo {
                    Some(v) => v.min(f),
                    None => f,
                });
                hi = Some(match hi {
                    Some(v) => v.max(c),
                    None => c,
                });
            }
        }
        Ok(Interval::new(lo.unwrap(), hi.unwrap(), p))
    }

    /// Natural logarithm; requires a strictly positive enclosure.
    pub fn ln(&self) -> Result<Interval, IntervalError> {
        if !self.lo.is_positive() {
            return Err(IntervalError::LnNonPositive(self.lo.to_string()));
        }
        let w = self.prec + GUARD;
        let (alo, elo) = ln_core(&self.lo, self.prec, w);
        let (ahi, ehi) = ln_core(&self.hi, self.prec, w);
        outward(alo - elo, ahi + ehi, w, self.prec)
    }

    /// Exponential with outward rounding.
    pub fn exp(&self) -> Result<Interval, IntervalError> {
        let bound = BigInt::from(MAX_EXP_ARG) << self.prec;
        if self.lo.magnitude() > bound.magnitude() || self.hi.magnitude() > bound.magnitude() {
            return Err(IntervalError::ExpRange);
        }
        let w = self.prec + GUARD;
        let s = GUARD as usize;
        let (alo, elo) = exp_core(&(&self.lo << s), w);
        let (ahi, ehi) = exp_core(&(&self.hi << s), w);
        let out = outward(alo - elo, ahi + ehi, w, self.prec)?;
        // exp is positive; deep underflow would otherwise leak a negative lo.
        Ok(Interval::new(out.lo.max(BigInt::zero()), out.hi, out.prec))
    }

    /// x^(num/den) for a strictly positive enclosure, via exp(r ln x).
    pub fn pow_ratio(&self, num: i64, den: u64) -> Result<Interval, IntervalError> {
        assert!(den != 0, "pow_ratio with zero denominator");
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        self.ln()?.mul_rational(&r).exp()
    }

    /// None when the enclosures overlap (including touching endpoints).
    pub fn partial_cmp_itv(&self, other: &Interval) -> Option<std::cmp::Ordering> {
        let (a, b) = self.aligned(other);
        if a.hi < b.lo {
            Some(std::cmp::Ordering::Less)
        } else if a.lo > b.hi {
            Some(std::cmp::Ordering::Greater)
        } else {
            None
        }
    }

    /// Position of an exact rational relative to this enclosure.
    pub fn cmp_rational(&self, r: &BigRational) -> Option<std::cmp::Ordering> {
        if r < &self.lo_rational() {
            Some(std::cmp::Ordering::Less)
        } else if r > &self.hi_rational() {
            Some(std::cmp::Ordering::Greater)
        } else {
            None
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.17}±2^{}", self.to_f64(), ulp_log2(self))
    }
}

fn ulp_log2(itv: &Interval) -> i64 {
    let w = itv.width_ulps();
    if w.is_zero() {
        i64::MIN
    } else {
        w.bits() as i64 - itv.prec as i64
    }
}

/// Round an enclosure at scale `w` outward to scale `prec` (w >= prec).
fn outward(lo_w: BigInt, hi_w: BigInt, w: u32, prec: u32) -> Result<Interval, IntervalError> {
    let s = (w - prec) as usize;
    Ok(Interval::new(lo_w >> s, shr_ceil(&hi_w, s), prec))
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -(-a).div_floor(b)
}

fn shr_ceil(a: &BigInt, s: usize) -> BigInt {
    -((-a) >> s)
}

/// Round-to-nearest right shift (ties away from zero are fine here:
/// every caller charges a full ulp for this step).
fn shr_nearest(a: &BigInt, s: usize) -> BigInt {
    if s == 0 {
        return a.clone();
    }
    let half = BigInt::one() << (s - 1);
    (a + half) >> s
}

/// Nearest-integer division by a positive divisor, error <= 1/2.
fn div_nearest(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(b.is_positive());
    let q = a.div_floor(b);
    let r = a - &q * b;
    if &r * 2 >= *b {
        q + 1
    } else {
        q
    }
}

/// ln(n * 2^-scale) for n > 0 at working scale w.
/// Returns (approximation, error bound), both in units of 2^-w.
fn ln_core(n: &BigInt, scale: u32, w: u32) -> (BigInt, BigInt) {
    debug_assert!(n.is_positive());
    let bl = n.bits() as i64; // n in [2^(bl-1), 2^bl)
    let e = bl - 1 - scale as i64; // value = u * 2^e, u in [1, 2)
    let shift = w as i64 - (bl - 1);
    let u = if shift >= 0 {
        n << (shift as usize)
    } else {
        shr_nearest(n, (-shift) as usize)
    };
    let one_w = BigInt::one() << w;
    // z = (u - 1)/(u + 1) in [0, 1/3], so atanh converges a factor >= 9 per term.
    let z = div_nearest(&((&u - &one_w) << w), &(&u + &one_w));
    let zz = shr_nearest(&(&z * &z), w as usize);
    let mut acc = z.clone();
    let mut t = z;
    let mut k = BigInt::from(3);
    let mut iters: u64 = 0;
    while !t.is_zero() {
        t = shr_nearest(&(&t * &zz), w as usize);
        acc += div_nearest(&t, &k);
        k += 2;
        iters += 1;
    }
    let (ln2, ln2_err) = ln2_cached(w);
    let approx = (acc << 1) + BigInt::from(e) * &ln2;
    // Budget: 2 rounding ulps per series step (doubled by the final *2),
    // tail, z and u rounding, and |e| copies of the ln2 error.
    let err = BigInt::from(4 * iters + 24) + BigInt::from(e.unsigned_abs()) * (ln2_err + 1u8);
    (approx, err)
}

/// exp(v * 2^-w) at scale w for |v * 2^-w| <= MAX_EXP_ARG.
/// Returns (approximation, error bound) in units of 2^-w.
fn exp_core(v: &BigInt, w: u32) -> (BigInt, BigInt) {
    let (ln2, ln2_err) = ln2_cached(w);
    let k_big = div_nearest(v, &ln2);
    let k = k_big.to_i64().expect("exp argument within range");
    let r = v - &k_big * &ln2; // |r| <= ln2/2 + slack
    let one_w = BigInt::one() << w;
    let mut acc = &one_w + &r;
    let mut t = r.clone();
    let mut j = BigInt::from(2);
    let mut iters: u64 = 0;
    while !t.is_zero() {
        t = shr_nearest(&(&t * &r), w as usize);
        t = div_nearest(&t, &j);
        acc += &t;
        j += 1;
        iters += 1;
    }
    // d(exp)/dr <= 2 on |r| < 0.7 covers amplification of the r error.
    let err_units = BigInt::from(2 * iters + 8)
        + BigInt::from(2u8) * (BigInt::from(k.unsigned_abs()) * ln2_err + 2u8);
    if k >= 0 {
        (acc << k as usize, err_units << k as usize)
    } else {
        let s = (-k) as usize;
        (shr_nearest(&acc, s), (err_units >> s) + 2u8)
    }
}

/// Cached ln 2 at scale w with its ulp error bound.
fn ln2_cached(w: u32) -> (BigInt, BigInt) {
    static CACHE: OnceLock<Mutex<HashMap<u32, (BigInt, BigInt)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some((v, e)) = guard.get(&w) {
        return (v.clone(), e.clone());
    }
    // ln 2 = 2 atanh(1/3).
    let z = div_nearest(&(BigInt::one() << (w + 1)), &BigInt::from(6)); // 1/3 at scale w
    let zz = shr_nearest(&(&z * &z), w as usize);
    let mut acc = z.clone();
    let mut t = z;
    let mut k = BigInt::from(3);
    let mut iters: u64 = 0;
    while !t.is_zero() {
        t = shr_nearest(&(&t * &zz), w as usize);
        acc += div_nearest(&t, &k);
        k += 2;
        iters += 1;
    }
    let value: BigInt = acc << 1;
    let err = BigInt::from(4 * iters + 16);
    guard.insert(w, (value.clone(), err.clone()));
    (value, err)
}
