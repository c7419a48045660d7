//! The special flow over the rotation under the roof: points (x, s)
//! with 0 <= s < f(x), moved by t through the unique iterate count m
//! with f^(m)(x) <= s + t < f^(m+1)(x).
//!
//! The iterate search gallops outward on cached prefix sums and then
//! bisects; since f >= a > 0 the prefix sums are strictly monotone and
//! the bracket is unique. Heights and times are scalars (exact rational
//! or enclosure): a rational time against transcendental Birkhoff sums
//! always separates under refinement, so boundary snapping only fires
//! on the exact identification (x, f(x)) ~ (Rx, 0).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_core::RngCore;
use thiserror::Error;

use crate::circle::CirclePoint;
use crate::interval::Interval;
use crate::numeration::ContinuedFraction;
use crate::roof::{birkhoff_sum, roof_eval, EvalContext, RoofError, RoofFunction};
use crate::scalar::{Scalar, TernaryOrder};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("height {s} is not inside [0, f(x)) (f(x) ~ {fx})")]
    HeightOutOfRange { s: String, fx: String },
    #[error("iterate bracket undecided at {0} bits")]
    Precision(u32),
    #[error("iterate search exceeded the bound |m| <= {0}")]
    SearchOverrun(String),
    #[error(transparent)]
    Roof(#[from] RoofError),
}

/// A point of the flow space: base coordinate and height under the roof.
#[derive(Clone, Debug)]
pub struct FlowPoint {
    pub x: CirclePoint,
    pub s: Scalar,
}

impl FlowPoint {
    /// Validates 0 <= s < f(x). A height indistinguishable from the
    /// roof value at current precision is rejected as out of range.
    pub fn new(
        x: CirclePoint,
        s: Scalar,
        f: &RoofFunction,
        ctx: &EvalContext,
    ) -> Result<Self, FlowError> {
        let fx = roof_eval(f, &x, ctx)?;
        let nonneg = matches!(
            s.cmp(&Scalar::zero()),
            TernaryOrder::Greater | TernaryOrder::Indeterminate
        ) || s.is_exact_zero();
        if !nonneg || s.cmp(&fx) != TernaryOrder::Less {
            return Err(FlowError::HeightOutOfRange {
                s: format!("{:.6}", s.to_f64()),
                fx: format!("{:.6}", fx.to_f64()),
            });
        }
        Ok(FlowPoint { x, s })
    }

    pub fn base(x: CirclePoint) -> Self {
        FlowPoint { x, s: Scalar::zero() }
    }
}

/// Outcome of moving a flow point by time t.
#[derive(Clone, Debug)]
pub struct FlowStep {
    pub target: FlowPoint,
    pub m: BigInt,
    /// s + t - f^(m)(x), the new height.
    pub residual: Scalar,
}

/// Monotone table of prefix sums f^(m)(x) grown on demand in both
/// directions; the workhorse behind the iterate search.
struct PrefixSums<'a> {
    f: &'a RoofFunction,
    x: &'a CirclePoint,
    alpha: &'a BigRational,
    ctx: &'a EvalContext,
    /// fwd[k] = f^(k)(x) for k >= 1.
    fwd: Vec<Scalar>,
    /// bwd[k] = f^(-k)(x) for k >= 1 (negative values).
    bwd: Vec<Scalar>,
}

impl<'a> PrefixSums<'a> {
    fn new(f: &'a RoofFunction, x: &'a CirclePoint, alpha: &'a BigRational, ctx: &'a EvalContext) -> Self {
        PrefixSums { f, x, alpha, ctx, fwd: Vec::new(), bwd: Vec::new() }
    }

    /// f^(m)(x) for any signed m, extending the cached tables by single
    /// roof evaluations (cocycle identity).
    fn get(&mut self, m: &BigInt) -> Result<Scalar, FlowError> {
        if m.is_zero() {
            return Ok(Scalar::zero());
        }
        let k = m.abs().to_usize().ok_or_else(|| FlowError::SearchOverrun(m.to_string()))?;
        if m.is_positive() {
            while self.fwd.len() < k {
                let i = self.fwd.len();
                let xi = self.x.rotate(self.alpha, &BigInt::from(i));
                let term = roof_eval(self.f, &xi, self.ctx)?;
                let prev = if i == 0 { Scalar::zero() } else { self.fwd[i - 1].clone() };
                self.fwd.push(prev.add(&term));
            }
            Ok(self.fwd[k - 1].clone())
        } else {
            while self.bwd.len() < k {
                let i = self.bwd.len() + 1;
                let xi = self.x.rotate(self.alpha, &BigInt::from(-(i as i64)));
                let term = roof_eval(self.f, &xi, self.ctx)?;
                let prev = if i == 1 { Scalar::zero() } else { self.bwd[i - 2].clone() };
                self.bwd.push(prev.sub(&term));
            }
            Ok(self.bwd[k - 1].clone())
        }
    }

    /// Does f^(m)(x) <= target hold? An indeterminate comparison first
    /// tries exact-vs-exact, then the boundary snap (a residual provably
    /// inside the snap ball is glued to the upper branch, implementing
    /// the identification (x, f(x)) ~ (Rx, 0)), then precision retries.
    fn le_target(&mut self, m: &BigInt, target: &Scalar) -> Result<bool, FlowError> {
        let v = self.get(m)?;
        match v.cmp(target) {
            TernaryOrder::Less => Ok(true),
            TernaryOrder::Greater => Ok(false),
            TernaryOrder::Indeterminate => {
                if let (Some(a), Some(b)) = (v.exact_value(), target.exact_value()) {
                    return Ok(a <= b);
                }
                let snap = BigRational::new(BigInt::one(), BigInt::one() << (self.ctx.prec / 2));
                let diff = target.sub(&v).as_interval(self.ctx.prec);
                if diff.lo_rational().abs().max(diff.hi_rational().abs()) <= snap {
                    return Ok(true);
                }
                for prec in [2 * self.ctx.prec, 4 * self.ctx.prec, self.ctx.max_prec] {
                    if prec > self.ctx.max_prec {
                        break;
                    }
                    let finer = EvalContext { prec, ..self.ctx.clone() };
                    let v2 = birkhoff_sum(self.f, self.x, m, self.alpha, &finer)?.value;
                    match v2.cmp(target) {
                        TernaryOrder::Less => return Ok(true),
                        TernaryOrder::Greater => return Ok(false),
                        TernaryOrder::Indeterminate => continue,
                    }
                }
                Err(FlowError::Precision(self.ctx.max_prec))
            }
        }
    }
}

/// T_t: find the unique m with f^(m)(x) <= s + t < f^(m+1)(x) and land
/// at (x + m alpha, s + t - f^(m)(x)).
pub fn flow(
    f: &RoofFunction,
    p: &FlowPoint,
    t: &Scalar,
    cf: &ContinuedFraction,
    ctx: &EvalContext,
) -> Result<FlowStep, FlowError> {
    let alpha = cf.value();
    let target_time = p.s.add(t);
    let mut sums = PrefixSums::new(f, &p.x, &alpha, ctx);

    // |m| can never exceed (|t| + f(x)) / a.
    let fx = roof_eval(f, &p.x, ctx)?;
    let t_mag = t.abs().as_interval(ctx.prec).hi_rational();
    let cap_rat = (t_mag + fx.as_interval(ctx.prec).hi_rational()) / f.floor()
        + BigRational::from_integer(2.into());
    let cap = cap_rat.to_integer();

    // Gallop: find lo <= answer < hi, where answer is the largest m with
    // f^(m) <= target.
    let mut lo;
    let mut hi;
    if sums.le_target(&BigInt::one(), &target_time)? {
        // answer >= 1: double until f^(hi) > target.
        lo = BigInt::one();
        hi = BigInt::from(2);
        while sums.le_target(&hi, &target_time)? {
            lo = hi.clone();
            hi = &hi * 2;
            if hi > cap {
                hi = cap.clone() + 1;
                break;
            }
        }
    } else if sums.le_target(&BigInt::zero(), &target_time)? {
        lo = BigInt::zero();
        hi = BigInt::one();
    } else {
        // answer < 0: double downward until f^(lo) <= target.
        hi = BigInt::zero();
        lo = BigInt::from(-1);
        loop {
            if -lo.clone() > cap {
                lo = -(cap.clone() + BigInt::one());
                if !sums.le_target(&lo, &target_time)? {
                    return Err(FlowError::SearchOverrun(cap.to_string()));
                }
                break;
            }
            if sums.le_target(&lo, &target_time)? {
                break;
            }
            hi = lo.clone();
            lo = &lo * 2;
        }
    }
    // Bisect to the unique m: f^(m) <= target < f^(m+1).
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / 2;
        if sums.le_target(&mid, &target_time)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = lo;
    let f_m = sums.get(&m)?;
    let residual = target_time.sub(&f_m);
    let x_new = p.x.rotate(&alpha, &m);
    Ok(FlowStep {
        target: FlowPoint { x: x_new, s: residual.clone() },
        m,
        residual,
    })
}

/// Report of the q_n-return: t_n = f^(q_n)(x) flows (x, s) to
/// (x + q_n alpha, s).
#[derive(Clone, Debug)]
pub struct ReturnReport {
    pub t_n: Scalar,
    pub check: bool,
    /// Set when the height does not survive under the shifted roof
    /// (s >= f(x + q_n alpha)); check is false in that case.
    pub height_overflow: bool,
    pub base_error: BigRational,
    pub height_error: BigRational,
}

/// Special return time at scale n, verified by running the flow.
pub fn special_return(
    f: &RoofFunction,
    p: &FlowPoint,
    cf: &ContinuedFraction,
    n: usize,
    ctx: &EvalContext,
) -> Result<ReturnReport, FlowError> {
    let alpha = cf.value();
    let q = cf.q(n);
    let t_n = birkhoff_sum(f, &p.x, q, &alpha, ctx)?.value;
    let shifted = p.x.rotate(&alpha, q);
    let f_shifted = roof_eval(f, &shifted, ctx)?;
    if p.s.cmp(&f_shifted) != TernaryOrder::Less {
        return Ok(ReturnReport {
            t_n,
            check: false,
            height_overflow: true,
            base_error: BigRational::zero(),
            height_error: BigRational::zero(),
        });
    }
    let step = flow(f, p, &t_n, cf, ctx)?;
    let base_error = step.target.x.dist(&shifted).value;
    let height_diff = step.target.s.sub(&p.s);
    let height_itv = height_diff.as_interval(ctx.prec);
    let height_error = height_itv
        .lo_rational()
        .abs()
        .max(height_itv.hi_rational().abs());
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (ctx.prec / 2));
    let check = step.m == *q && base_error.is_zero() && height_error <= tol;
    Ok(ReturnReport { t_n, check, height_overflow: false, base_error, height_error })
}

/// Taxicab metric on the flow space: base distance plus height difference.
pub fn flow_distance(p: &FlowPoint, q: &FlowPoint) -> Scalar {
    let base = p.x.dist(&q.x);
    let base_scalar = if base.err.is_zero() {
        Scalar::Exact(base.value)
    } else {
        Scalar::Approx(
            Interval::from_rational(&base.value, 128).add(&Interval::centered_pad(&base.err, 128)),
        )
    };
    base_scalar.add(&p.s.sub(&q.s).abs())
}

/// Switchable-recurrence window statistic: the fraction of integer
/// n in [m_start, m_start + window] with
/// d(T_{n t0} p, T_{n t0 + shift} q) < eps.
#[derive(Clone, Debug)]
pub struct SwrReport {
    pub fraction: f64,
    pub hits: u64,
    pub indeterminate: u64,
    pub total: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn swr_statistic(
    f: &RoofFunction,
    p: &FlowPoint,
    q: &FlowPoint,
    t0: &Scalar,
    shift: &Scalar,
    m_start: u64,
    window: u64,
    eps: &BigRational,
    cf: &ContinuedFraction,
    ctx: &EvalContext,
) -> Result<SwrReport, FlowError> {
    let mut hits = 0u64;
    let mut indeterminate = 0u64;
    let total = window + 1;
    for n in m_start..=m_start + window {
        let tn = t0.mul(&Scalar::from_int(n as i64));
        let a = flow(f, p, &tn, cf, ctx)?;
        let b = flow(f, q, &tn.add(shift), cf, ctx)?;
        let d = flow_distance(&a.target, &b.target);
        match d.cmp(&Scalar::Exact(eps.clone())) {
            TernaryOrder::Less => hits += 1,
            TernaryOrder::Greater => {}
            TernaryOrder::Indeterminate => indeterminate += 1,
        }
    }
    Ok(SwrReport {
        fraction: hits as f64 / total as f64,
        hits,
        indeterminate,
        total,
    })
}

/// Rejection sampler for the flow-invariant measure (normalized
/// Lebesgue under the roof). Base points falling inside the sampler's
/// own exclusion ball are rejected and tallied as mass defect.
pub struct MeasureSampler<'a> {
    f: &'a RoofFunction,
    ctx: EvalContext,
    /// Exclusion used by the sampler (wider than ctx.rho0 so the cap
    /// stays moderate); excluded mass is reported.
    x_exclusion: BigRational,
    f_cap: BigRational,
    pub rejected_near_singularity: u64,
    pub proposals: u64,
}

impl<'a> MeasureSampler<'a> {
    pub fn new(f: &'a RoofFunction, ctx: &EvalContext) -> Result<Self, FlowError> {
        // Exclude ||x|| < 2^-40: the excluded measure 2^-39 is far below
        // any statistic resolution used downstream. On the remaining
        // annulus the log part is convex and peaks at an edge, so
        // max(f(eps), f(1 - eps)) + max g dominates the roof.
        let x_exclusion = BigRational::new(BigInt::one(), BigInt::one() << 40);
        let left = roof_eval(f, &CirclePoint::exact(x_exclusion.clone()), ctx)?
            .as_interval(ctx.prec)
            .hi_rational();
        let right = roof_eval(f, &CirclePoint::exact(BigRational::one() - &x_exclusion), ctx)?
            .as_interval(ctx.prec)
            .hi_rational();
        let f_cap = left.max(right) + f.g().max_value();
        Ok(MeasureSampler {
            f,
            ctx: ctx.clone(),
            x_exclusion,
            f_cap,
            rejected_near_singularity: 0,
            proposals: 0,
        })
    }

    /// One sample (x, s) with x uniform and s uniform under f(x).
    pub fn sample<R: RngCore>(&mut self, rng: &mut R) -> Result<FlowPoint, FlowError> {
        loop {
            self.proposals += 1;
            let x_rat = crate::stats::sample_unit_rational(rng);
            let norm = crate::circle::circle_norm(&x_rat);
            if norm < self.x_exclusion {
                self.rejected_near_singularity += 1;
                continue;
            }
            let x = CirclePoint::exact(x_rat);
            let fx = roof_eval(self.f, &x, &self.ctx)?;
            let h = crate::stats::sample_unit_rational(rng) * &self.f_cap;
            // Accept when h < f(x), decided against the enclosure;
            // indeterminate proposals (width ~2^-prec) are rejected,
            // biasing acceptance by less than the enclosure width.
            if Scalar::Exact(h.clone()).cmp(&fx) == TernaryOrder::Less {
                return Ok(FlowPoint { x, s: Scalar::Exact(h) });
            }
        }
    }

    pub fn f_cap(&self) -> &BigRational {
        &self.f_cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn golden(depth: usize) -> ContinuedFraction {
        ContinuedFraction::from_quotients(vec![1; depth], None).unwrap()
    }

    fn setup() -> (RoofFunction, ContinuedFraction, EvalContext) {
        (RoofFunction::normalized_default(), golden(25), EvalContext::default())
    }

    #[test]
    fn zero_time_is_identity() {
        let (f, cf, ctx) = setup();
        let p = FlowPoint::new(
            CirclePoint::exact(rat(2, 7)),
            Scalar::from_rational(rat(1, 10)),
            &f,
            &ctx,
        )
        .unwrap();
        let step = flow(&f, &p, &Scalar::zero(), &cf, &ctx).unwrap();
        assert_eq!(step.m, BigInt::zero());
        assert_eq!(step.target.x, p.x);
        assert!(step
            .target
            .s
            .sub(&p.s)
            .as_interval(128)
            .contains_rational(&BigRational::zero()));
    }

    #[test]
    fn short_time_stays_under_roof() {
        let (f, cf, ctx) = setup();
        let x = CirclePoint::exact(rat(2, 7));
        let p = FlowPoint::base(x.clone());
        // f(2/7) > 1/4 always (g floor); t = 1/5 < 1/4 keeps m = 0.
        let step = flow(&f, &p, &Scalar::from_rational(rat(1, 5)), &cf, &ctx).unwrap();
        assert_eq!(step.m, BigInt::zero());
        assert_eq!(step.target.x, x);
        // m = 0 leaves the exact prefix sum at zero, so the residual is
        // the exact rational s + t.
        assert_eq!(step.target.s.exact_value().cloned(), Some(rat(1, 5)));
    }

    #[test]
    fn roof_boundary_rolls_to_next_fiber() {
        // t = f(x) - s from (x, s) lands exactly at (Rx, 0).
        let (f, cf, ctx) = setup();
        let x = CirclePoint::exact(rat(2, 7));
        let p = FlowPoint::base(x.clone());
        let fx = roof_eval(&f, &x, &ctx).unwrap();
        let step = flow(&f, &p, &fx, &cf, &ctx).unwrap();
        assert_eq!(step.m, BigInt::one());
        assert_eq!(step.target.x, x.rotate(&cf.value(), &BigInt::one()));
        assert!(step
            .target
            .s
            .as_interval(128)
            .contains_rational(&BigRational::zero()));
    }

    #[test]
    fn height_invariant_enforced() {
        let (f, cf, ctx) = setup();
        let _ = cf;
        let x = CirclePoint::exact(rat(2, 7));
        assert!(FlowPoint::new(x.clone(), Scalar::from_int(50), &f, &ctx).is_err());
        assert!(FlowPoint::new(x.clone(), Scalar::from_rational(rat(-1, 10)), &f, &ctx).is_err());
        assert!(FlowPoint::new(x, Scalar::from_rational(rat(1, 10)), &f, &ctx).is_ok());
    }

    #[test]
    fn iterate_count_respects_floor_bound() {
        let (f, cf, ctx) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = CirclePoint::exact(crate::stats::sample_unit_rational(&mut rng));
            let p = FlowPoint::base(x.clone());
            for t in [rat(7, 2), rat(-19, 3), rat(50, 1), rat(-50, 1)] {
                let fx_hi = roof_eval(&f, &x, &ctx).unwrap().as_interval(128).hi_rational();
                let bound = ((t.abs() + fx_hi) / f.floor()).to_integer() + 1;
                let step = flow(&f, &p, &Scalar::from_rational(t), &cf, &ctx).unwrap();
                assert!(step.m.abs() <= bound, "m = {}, bound = {}", step.m, bound);
            }
        }
    }

    #[test]
    fn flow_property_composition() {
        let (f, cf, ctx) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let x = CirclePoint::exact(crate::stats::sample_unit_rational(&mut rng));
            let p = FlowPoint::base(x);
            for (s, t) in [(rat(13, 4), rat(9, 5)), (rat(-7, 3), rat(22, 7)), (rat(31, 2), rat(-14, 5))] {
                let one = flow(&f, &p, &Scalar::from_rational(&s + &t), &cf, &ctx).unwrap();
                let first = flow(&f, &p, &Scalar::from_rational(s.clone()), &cf, &ctx).unwrap();
                let two = flow(&f, &first.target, &Scalar::from_rational(t.clone()), &cf, &ctx).unwrap();
                let d = flow_distance(&one.target, &two.target);
                assert!(
                    d.as_interval(128).contains_rational(&BigRational::zero())
                        || d.to_f64() < 1e-25,
                    "flow property violated: d = {}",
                    d.to_f64()
                );
                assert_eq!(one.m, &first.m + &two.m);
            }
        }
    }

    #[test]
    fn special_return_comes_back() {
        let (f, cf, ctx) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [5usize, 8, 11] {
            let x = CirclePoint::exact(crate::stats::sample_unit_rational(&mut rng));
            let p = FlowPoint::base(x);
            let report = special_return(&f, &p, &cf, n, &ctx).unwrap();
            assert!(report.check, "return check failed at n = {n}: {report:?}");
            // Normalized roof: t_n tracks q_n.
            let ratio = report.t_n.to_f64() / cf.q(n).to_f64().unwrap();
            assert!((ratio - 1.0).abs() < 0.5, "t_n/q_n = {ratio}");
        }
    }

    #[test]
    fn swr_identical_orbits_give_full_fraction() {
        let (f, cf, ctx) = setup();
        let p = FlowPoint::base(CirclePoint::exact(rat(3, 11)));
        let r = swr_statistic(
            &f,
            &p,
            &p,
            &Scalar::from_rational(rat(7, 8)),
            &Scalar::zero(),
            2,
            10,
            &rat(1, 100),
            &cf,
            &ctx,
        )
        .unwrap();
        assert_eq!(r.hits, r.total);
        assert_eq!(r.indeterminate, 0);
    }

    #[test]
    fn swr_time_shifted_same_orbit() {
        let (f, cf, ctx) = setup();
        let p = FlowPoint::base(CirclePoint::exact(rat(3, 11)));
        let r = Scalar::from_rational(rat(5, 7));
        let q = flow(&f, &p, &r, &cf, &ctx).unwrap().target;
        let rep = swr_statistic(
            &f,
            &p,
            &q,
            &Scalar::from_rational(rat(9, 8)),
            &r.neg(),
            1,
            8,
            &rat(1, 100),
            &cf,
            &ctx,
        )
        .unwrap();
        assert_eq!(rep.hits, rep.total, "{rep:?}");
    }

    #[test]
    fn flow_distance_is_a_metric_on_samples() {
        let (f, _, ctx) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut sampler = MeasureSampler::new(&f, &ctx).unwrap();
        let pts: Vec<FlowPoint> = (0..6).map(|_| sampler.sample(&mut rng).unwrap()).collect();
        for a in &pts {
            assert!(flow_distance(a, a).is_exact_zero() || flow_distance(a, a).to_f64() == 0.0);
            for b in &pts {
                let ab = flow_distance(a, b).to_f64();
                let ba = flow_distance(b, a).to_f64();
                assert!((ab - ba).abs() < 1e-15);
                for c in &pts {
                    let ac = flow_distance(a, c).to_f64();
                    let cb = flow_distance(c, b).to_f64();
                    assert!(ab <= ac + cb + 1e-12, "triangle violated");
                }
            }
        }
    }

    #[test]
    fn sampler_respects_roof() {
        let (f, _, ctx) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut sampler = MeasureSampler::new(&f, &ctx).unwrap();
        for _ in 0..50 {
            let p = sampler.sample(&mut rng).unwrap();
            let fx = roof_eval(&f, &p.x, &ctx).unwrap();
            assert_eq!(p.s.cmp(&fx), TernaryOrder::Less);
            assert!(p.s.cmp(&Scalar::zero()) != TernaryOrder::Less);
        }
        assert!(BigRational::from_f64(20.0).unwrap() > *sampler.f_cap());
    }
}
