//! Verification suites over the rest of the crate: named experiment
//! bundles with seeded sampling, two-tier verdicts and deterministic
//! JSON reports.
//!
//! Checks come in two kinds, and the registry pins the kind per suite:
//!
//! * hard checks certify an error-bounded inequality and carry an exact
//!   rational margin; they decide the process exit status;
//! * reported checks carry a sample size and a statistic; thresholds on
//!   them live in the caller (an asymptotic statement checked at desk
//!   scale is an observation, not a theorem).

pub mod fixtures;
mod suites;

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CircleError, CirclePoint};
use crate::flow::FlowError;
use crate::numeration::{ContinuedFraction, NumerationError};
use crate::roof::{EvalContext, RoofError, RoofFunction, RoofSpec};
use crate::scalar::parse_decimal;
use crate::shear::{
    classify_pair, small_shearing_search, PairClass, PairReport, ShearError,
};
use crate::stats::sample_unit_rational;

use fixtures::AlphaSpec;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error(
        "sampling budget exceeded: wanted {wanted}, accepted {accepted} \
         after {attempts} attempts (acceptance rate {rate:.4})"
    )]
    Budget { wanted: u64, accepted: u64, attempts: u64, rate: f64 },
    #[error("suite `{suite}` may not emit {verdict} records (check `{check}`)")]
    Partition { suite: String, verdict: &'static str, check: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Numeration(#[from] NumerationError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error(transparent)]
    Roof(#[from] RoofError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Shear(#[from] ShearError),
}

/// Verdict of one check record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Reported,
}

/// One row of a suite report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: String,
    pub output: String,
    pub bound: String,
    /// Exact margin (rational string); present on every hard check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    /// Present on every reported check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<u64>,
    pub verdict: Verdict,
}

impl CheckRecord {
    fn hard(
        name: impl Into<String>,
        inputs: impl Into<String>,
        output: impl Into<String>,
        bound: impl Into<String>,
        margin: &BigRational,
        pass: bool,
    ) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            inputs: inputs.into(),
            output: output.into(),
            bound: bound.into(),
            margin: Some(margin.to_string()),
            sample_size: None,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        }
    }

    fn reported(
        name: impl Into<String>,
        inputs: impl Into<String>,
        output: impl Into<String>,
        bound: impl Into<String>,
        sample_size: u64,
    ) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            inputs: inputs.into(),
            output: output.into(),
            bound: bound.into(),
            margin: None,
            sample_size: Some(sample_size),
            verdict: Verdict::Reported,
        }
    }
}

/// Report of one suite run. Serialization is deterministic for a fixed
/// config and seed except for `wall_time_ms`.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub alpha: String,
    pub precision_bits: u32,
    pub seed: u64,
    pub hard_total: u64,
    pub hard_failures: u64,
    pub reported_total: u64,
    pub retries: u64,
    pub checks: Vec<CheckRecord>,
    pub wall_time_ms: u64,
}

impl SuiteReport {
    pub fn hard_ok(&self) -> bool {
        self.hard_failures == 0
    }

    /// Look a check up by name.
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Which verdicts a suite is allowed to emit. The split keeps exact
/// facts and desk-scale observations from blurring into each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteKind {
    /// Exact error-bounded inequalities only.
    Hard,
    /// Observed statistics only.
    Reported,
    /// Exact sub-facts plus observed statistics.
    Mixed,
}

pub struct SuiteMeta {
    pub name: &'static str,
    pub kind: SuiteKind,
    pub summary: &'static str,
}

pub const REGISTRY: &[SuiteMeta] = &[
    SuiteMeta {
        name: "convergent-inequality",
        kind: SuiteKind::Hard,
        summary: "1/(q_n+q_{n+1}) < |q_n a - p_n| < 1/q_{n+1} on a fixture sweep",
    },
    SuiteMeta {
        name: "ostrowski",
        kind: SuiteKind::Hard,
        summary: "digit expansion round-trip and brute-force uniqueness",
    },
    SuiteMeta {
        name: "denjoy-koksma",
        kind: SuiteKind::Hard,
        summary: "|phi^(q_n) - q_n integral| <= Var(phi) for BV test functions",
    },
    SuiteMeta {
        name: "three-distance",
        kind: SuiteKind::Hard,
        summary: "orbit gap bounds 1/(2q_n) and 2/q_n, exact",
    },
    SuiteMeta {
        name: "distance-estimate",
        kind: SuiteKind::Hard,
        summary: "d_k < 5/(6 q_{n_k}) over sampled off-orbit pairs",
    },
    SuiteMeta {
        name: "flow-basic",
        kind: SuiteKind::Hard,
        summary: "identity, group property and q_n-return of the special flow",
    },
    SuiteMeta {
        name: "measure-preservation",
        kind: SuiteKind::Reported,
        summary: "KS/chi-square invariance statistics of the flow",
    },
    SuiteMeta {
        name: "singular-denjoy-koksma",
        kind: SuiteKind::Mixed,
        summary: "empirical constant in the singular Birkhoff-sum bound",
    },
    SuiteMeta {
        name: "derivative-birkhoff",
        kind: SuiteKind::Reported,
        summary: "derivative Birkhoff sums against the m log m profile",
    },
    SuiteMeta {
        name: "small-shearing",
        kind: SuiteKind::Mixed,
        summary: "small-shearing search success rate plus direct-summation oracle",
    },
    SuiteMeta {
        name: "large-shearing",
        kind: SuiteKind::Mixed,
        summary: "large-shearing bounds, straddle counts and decomposition identity",
    },
    SuiteMeta {
        name: "diophantine",
        kind: SuiteKind::Hard,
        summary: "finite-depth rotation-number class verdicts",
    },
];

pub fn suite_meta(name: &str) -> Option<&'static SuiteMeta> {
    REGISTRY.iter().find(|m| m.name == name)
}

fn default_precision() -> u32 {
    128
}

fn default_max_precision() -> u32 {
    4096
}

/// Configuration of a verification run; JSON-friendly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Rotation number, in the fixture grammar (`golden:25`,
    /// `make:0:40`, `cf:1,2,3`, or a fixture file path).
    pub alpha: String,
    /// Roof override; the normalized default roof when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roof: Option<RoofSpec>,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default = "default_max_precision")]
    pub max_precision_bits: u32,
    /// Singularity exclusion radius as a decimal string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_0: Option<String>,
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Scales every per-suite sample count down to at most this value;
    /// full criterion-scale counts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Directory for per-suite JSON reports (CLI plumbing).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl SuiteConfig {
    pub fn new(alpha: &str, suites: Vec<String>) -> SuiteConfig {
        SuiteConfig {
            alpha: alpha.into(),
            roof: None,
            precision_bits: default_precision(),
            max_precision_bits: default_max_precision(),
            rho_0: None,
            suites,
            seed: 0,
            samples: None,
            n_min: None,
            n_max: None,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.precision_bits == 0 {
            return Err(HarnessError::Config("precision_bits must be positive".into()));
        }
        if self.max_precision_bits < self.precision_bits {
            return Err(HarnessError::Config(
                "max_precision_bits must be at least precision_bits".into(),
            ));
        }
        if let Some(0) = self.samples {
            return Err(HarnessError::Config("samples must be positive".into()));
        }
        if let (Some(lo), Some(hi)) = (self.n_min, self.n_max) {
            if lo > hi {
                return Err(HarnessError::Config("n_min exceeds n_max".into()));
            }
        }
        if let Some(r) = &self.rho_0 {
            let v = parse_decimal(r)
                .ok_or_else(|| HarnessError::Config(format!("bad rho_0 `{r}`")))?;
            if !v.is_positive() {
                return Err(HarnessError::Config("rho_0 must be positive".into()));
            }
        }
        for name in &self.suites {
            if suite_meta(name).is_none() {
                return Err(HarnessError::UnknownSuite(name.clone()));
            }
        }
        AlphaSpec::parse(&self.alpha)?;
        Ok(())
    }

    fn eval_context(&self) -> Result<EvalContext, HarnessError> {
        let mut ctx = EvalContext::with_precision(self.precision_bits);
        ctx.max_prec = self.max_precision_bits;
        if let Some(r) = &self.rho_0 {
            ctx.rho0 = parse_decimal(r)
                .ok_or_else(|| HarnessError::Config(format!("bad rho_0 `{r}`")))?;
        }
        Ok(ctx)
    }
}

/// Resolved inputs shared by every suite body.
pub(crate) struct SuiteCtx<'a> {
    pub config: &'a SuiteConfig,
    pub cf: ContinuedFraction,
    pub roof: RoofFunction,
    pub ctx: EvalContext,
}

impl SuiteCtx<'_> {
    /// Deterministic per-suite generator; `salt` separates the streams
    /// of different suites under one config seed.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.config.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// A criterion-scale default sample count, capped by the config.
    pub fn scaled(&self, full: u64) -> u64 {
        match self.config.samples {
            Some(cap) => full.min(cap),
            None => full,
        }
    }

    pub fn n_range(&self, lo_default: usize, hi_default: usize) -> (usize, usize) {
        (
            self.config.n_min.unwrap_or(lo_default),
            self.config.n_max.unwrap_or(hi_default),
        )
    }
}

/// Record collector handed to suite bodies.
pub(crate) struct Collector {
    records: Vec<CheckRecord>,
    retries: u64,
}

impl Collector {
    #[allow(clippy::too_many_arguments)]
    fn hard(
        &mut self,
        name: impl Into<String>,
        inputs: impl Into<String>,
        output: impl Into<String>,
        bound: impl Into<String>,
        margin: &BigRational,
        pass: bool,
    ) {
        self.records
            .push(CheckRecord::hard(name, inputs, output, bound, margin, pass));
    }

    fn reported(
        &mut self,
        name: impl Into<String>,
        inputs: impl Into<String>,
        output: impl Into<String>,
        bound: impl Into<String>,
        sample_size: u64,
    ) {
        self.records
            .push(CheckRecord::reported(name, inputs, output, bound, sample_size));
    }

    fn note_retry(&mut self) {
        self.retries += 1;
    }
}

/// Run one registered suite under the config.
pub fn run_suite(config: &SuiteConfig, suite: &str) -> Result<SuiteReport, HarnessError> {
    config.validate()?;
    let meta = suite_meta(suite).ok_or_else(|| HarnessError::UnknownSuite(suite.to_string()))?;
    let spec = AlphaSpec::parse(&config.alpha)?;
    let cf = spec.resolve()?;
    let roof = match &config.roof {
        Some(spec) => RoofFunction::from_spec(spec)?,
        None => RoofFunction::normalized_default(),
    };
    let sc = SuiteCtx { config, cf, roof, ctx: config.eval_context()? };
    let mut out = Collector { records: Vec::new(), retries: 0 };
    let started = Instant::now();
    suites::dispatch(meta.name, &sc, &mut out)?;
    let wall_time_ms = started.elapsed().as_millis() as u64;

    let mut hard_total = 0;
    let mut hard_failures = 0;
    let mut reported_total = 0;
    for record in &out.records {
        let (enforced, label) = match record.verdict {
            Verdict::Pass | Verdict::Fail => {
                if record.margin.is_none() {
                    return Err(HarnessError::Config(format!(
                        "hard check `{}` lost its margin",
                        record.name
                    )));
                }
                (meta.kind != SuiteKind::Reported, "hard")
            }
            Verdict::Reported => {
                if record.sample_size.is_none() {
                    return Err(HarnessError::Config(format!(
                        "reported check `{}` lost its sample size",
                        record.name
                    )));
                }
                (meta.kind != SuiteKind::Hard, "reported")
            }
        };
        if !enforced {
            return Err(HarnessError::Partition {
                suite: meta.name.into(),
                verdict: label,
                check: record.name.clone(),
            });
        }
        match record.verdict {
            Verdict::Pass => hard_total += 1,
            Verdict::Fail => {
                hard_total += 1;
                hard_failures += 1;
            }
            Verdict::Reported => reported_total += 1,
        }
    }

    Ok(SuiteReport {
        suite: meta.name.into(),
        alpha: spec.to_string(),
        precision_bits: config.precision_bits,
        seed: config.seed,
        hard_total,
        hard_failures,
        reported_total,
        retries: out.retries,
        checks: out.records,
        wall_time_ms,
    })
}

/// Run every suite listed in the config, in listed order.
pub fn run_suites(config: &SuiteConfig) -> Result<Vec<SuiteReport>, HarnessError> {
    config.validate()?;
    config.suites.iter().map(|s| run_suite(config, s)).collect()
}

/// One sampled pair with its classification.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub x: CirclePoint,
    pub y: CirclePoint,
    pub report: PairReport,
}

pub(crate) fn frac(r: &BigRational) -> BigRational {
    let f = r - r.floor();
    if f.is_negative() {
        f + BigRational::one()
    } else {
        f
    }
}

/// Core rejection sampler behind `sample_pairs`; stops at the attempt
/// budget and returns whatever it accepted, with the attempt count.
fn collect_pairs(
    cf: &ContinuedFraction,
    order_k: usize,
    filter: PairClass,
    count: u64,
    seed: u64,
    budget: u64,
) -> Result<(Vec<PairSample>, u64), HarnessError> {
    if filter == PairClass::Unclassified {
        return Err(HarnessError::Config("cannot target the unclassified gap".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = cf.value();
    let q = cf.q(order_k);
    let qf = q
        .to_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| HarnessError::Config("order too deep for pair sampling".into()))?;
    let q1f = cf.q(order_k + 1).to_f64().unwrap_or(f64::MAX);

    // Approximate class bands; exactness comes from the classifier.
    // The small class is open below; sampling stays in its top decade
    // because the divergence scale (and so the cost of every downstream
    // Birkhoff window) grows as the distance shrinks.
    let t_small = 1.0 / (q1f * q1f.ln());
    let t_big = 1.0 / (qf * qf.ln());
    let band = match filter {
        PairClass::Small => (t_small * 0.15, t_small),
        PairClass::Close => (5.0 / (6.0 * q1f), t_big),
        PairClass::TypeI => (t_big, 5.0 / (6.0 * qf)),
        PairClass::TypeII => (t_small, (5.0 / (6.0 * q1f)).min(t_big)),
        PairClass::SameOrbit | PairClass::Unclassified => (0.0, 0.0),
    };
    if filter != PairClass::SameOrbit {
        let (lo, hi) = band;
        // An empty band (the close range needs a large partial
        // quotient) is an empty class, not a malfunction.
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Ok((Vec::new(), 0));
        }
    }

    let mut out = Vec::with_capacity(count as usize);
    let mut attempts = 0u64;
    while (out.len() as u64) < count && attempts < budget {
        attempts += 1;
        let x = CirclePoint::exact(sample_unit_rational(&mut rng));
        let y = if filter == PairClass::SameOrbit {
            let two_q = 2 * q.to_u64().ok_or_else(|| {
                HarnessError::Config("same-orbit sampling needs a desk-scale q_n".into())
            })?;
            let mut j = (rng.next_u64() % (two_q - 1)) as i64 - (two_q as i64 / 2 - 1);
            if j == 0 {
                j = 1;
            }
            CirclePoint::exact(frac(
                &(x.value() + BigRational::from_integer(BigInt::from(j)) * &alpha),
            ))
        } else {
            // Log-uniform across the band: the classes span decades.
            let (lo, hi) = band;
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let d = lo * (hi / lo).powf(u);
            let d_rat = parse_decimal(&format!("{d:e}"))
                .ok_or_else(|| HarnessError::Config(format!("unrepresentable offset {d}")))?;
            let side = rng.next_u64() % 2 == 0;
            let offset = if side { d_rat } else { -d_rat };
            CirclePoint::exact(frac(&(x.value() + offset)))
        };
        let report = classify_pair(&x, &y, cf, order_k)?;
        if report.pair_class == filter {
            out.push(PairSample { x, y, report });
        }
    }
    Ok((out, attempts))
}

/// Draw pairs whose classification at `order_k` matches `filter`.
///
/// Same-orbit pairs are constructed directly. Distance classes are
/// synthesized by placing y at a sampled offset inside the class's
/// distance range and re-verifying with the classifier; the orbit
/// minimization can move a placed offset into a nearer class, so
/// placement alone is never trusted. Classes that are empty at the
/// given order (a close range exists only past a large partial
/// quotient) exhaust the attempt budget and report the acceptance rate.
pub fn sample_pairs(
    cf: &ContinuedFraction,
    order_k: usize,
    filter: PairClass,
    count: u64,
    seed: u64,
) -> Result<Vec<PairSample>, HarnessError> {
    if count == 0 {
        return Err(HarnessError::Config("pair count must be at least 1".into()));
    }
    let budget = count.saturating_mul(60).max(600);
    let (out, attempts) = collect_pairs(cf, order_k, filter, count, seed, budget)?;
    if (out.len() as u64) < count {
        return Err(HarnessError::Budget {
            wanted: count,
            accepted: out.len() as u64,
            attempts,
            rate: if attempts == 0 { 0.0 } else { out.len() as f64 / attempts as f64 },
        });
    }
    Ok(out)
}

/// Draw fully random pairs, verified off-orbit (d_k > 0 exactly).
pub fn sample_off_orbit_pairs(
    cf: &ContinuedFraction,
    order_k: usize,
    count: u64,
    seed: u64,
) -> Result<Vec<PairSample>, HarnessError> {
    if count == 0 {
        return Err(HarnessError::Config("pair count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count as usize);
    let budget = count.saturating_mul(10).max(100);
    let mut attempts = 0u64;
    while (out.len() as u64) < count {
        if attempts >= budget {
            return Err(HarnessError::Budget {
                wanted: count,
                accepted: out.len() as u64,
                attempts,
                rate: out.len() as f64 / attempts as f64,
            });
        }
        attempts += 1;
        let x = CirclePoint::exact(sample_unit_rational(&mut rng));
        let y = CirclePoint::exact(sample_unit_rational(&mut rng));
        let report = classify_pair(&x, &y, cf, order_k)?;
        if report.d_k.is_exact_zero() {
            continue;
        }
        out.push(PairSample { x, y, report });
    }
    Ok(out)
}

/// Aggregate row of a shearing sweep, one per (order, class).
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub order_k: usize,
    pub class: String,
    pub count: u64,
    pub success_rate: f64,
    pub mean_residual: f64,
}

/// Run the small-shearing search over sampled pairs of each good class
/// at each order, returning summary rows (and the per-pair outcomes).
pub fn shear_sweep(
    f: &RoofFunction,
    cf: &ContinuedFraction,
    orders: &[usize],
    count: u64,
    zeta: &BigRational,
    seed: u64,
    ctx: &EvalContext,
) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rows = Vec::new();
    for (i, &order) in orders.iter().enumerate() {
        for (j, class) in [PairClass::Small, PairClass::Close].into_iter().enumerate() {
            let pair_seed = seed ^ ((i as u64 * 2 + j as u64 + 1).wrapping_mul(0x9E37_79B9));
            // A thin or empty class at an order is a short or zero row
            // in the sweep, not an error.
            let budget = count.saturating_mul(60).max(600);
            let (pairs, _) = collect_pairs(cf, order, class, count, pair_seed, budget)?;
            let mut successes = 0u64;
            let mut residual_sum = 0.0f64;
            for pair in &pairs {
                let outcome = small_shearing_search(f, &pair.x, &pair.y, cf, order, zeta, ctx)?;
                if outcome.success {
                    successes += 1;
                }
                residual_sum += outcome.residual.to_f64().unwrap_or(f64::NAN);
            }
            let n = pairs.len() as u64;
            rows.push(SweepRow {
                order_k: order,
                class: class.name().into(),
                count: n,
                success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
                mean_residual: if n == 0 { 0.0 } else { residual_sum / n as f64 },
            });
        }
    }
    Ok(rows)
}

/// CSV rendering of a sweep, header included.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("order_k,class,count,success_rate,mean_residual\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.order_k, row.class, row.count, row.success_rate, row.mean_residual
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fixtures::golden;

    fn smoke_config(suites: &[&str]) -> SuiteConfig {
        let mut config = SuiteConfig::new("golden:25", suites.iter().map(|s| s.to_string()).collect());
        config.samples = Some(4);
        config
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut c = smoke_config(&["ostrowski"]);
        c.precision_bits = 0;
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        let mut c = smoke_config(&["no-such-suite"]);
        assert!(matches!(c.validate(), Err(HarnessError::UnknownSuite(_))));
        c = smoke_config(&["ostrowski"]);
        c.rho_0 = Some("nope".into());
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        c = smoke_config(&["ostrowski"]);
        c.samples = Some(0);
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn empty_suite_list_is_a_passing_run() {
        let config = smoke_config(&[]);
        let reports = run_suites(&config).unwrap();
        assert!(reports.is_empty());
    }

    #[test]
    fn registry_names_are_unique_and_dispatchable() {
        for (i, meta) in REGISTRY.iter().enumerate() {
            assert!(suite_meta(meta.name).is_some());
            for other in &REGISTRY[..i] {
                assert_ne!(meta.name, other.name);
            }
        }
    }

    #[test]
    fn sample_pairs_round_trips_each_class() {
        let cf = golden(25);
        for class in [PairClass::SameOrbit, PairClass::Small, PairClass::TypeI, PairClass::TypeII] {
            let pairs = sample_pairs(&cf, 9, class, 5, 11).unwrap();
            assert_eq!(pairs.len(), 5);
            for p in &pairs {
                assert_eq!(p.report.pair_class, class, "{class:?}");
            }
        }
        assert!(matches!(
            sample_pairs(&cf, 9, PairClass::Small, 0, 1),
            Err(HarnessError::Config(_))
        ));
        // Close pairs need a large partial quotient; golden has none.
        assert!(matches!(
            sample_pairs(&cf, 9, PairClass::Close, 3, 1),
            Err(HarnessError::Budget { .. })
        ));
    }

    #[test]
    fn off_orbit_pairs_have_positive_distance() {
        let cf = golden(25);
        let pairs = sample_off_orbit_pairs(&cf, 9, 8, 3).unwrap();
        assert_eq!(pairs.len(), 8);
        for p in &pairs {
            assert!(!p.report.d_k.is_exact_zero());
        }
    }

    #[test]
    fn reports_are_deterministic_given_seed() {
        let config = smoke_config(&["convergent-inequality", "diophantine"]);
        let mut a = run_suites(&config).unwrap();
        let mut b = run_suites(&config).unwrap();
        for r in a.iter_mut().chain(b.iter_mut()) {
            r.wall_time_ms = 0;
        }
        let ja = serde_json::to_string_pretty(&a).unwrap();
        let jb = serde_json::to_string_pretty(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn partition_fields_match_verdicts() {
        let config = smoke_config(&["convergent-inequality", "measure-preservation"]);
        for report in run_suites(&config).unwrap() {
            let kind = suite_meta(&report.suite).unwrap().kind;
            for check in &report.checks {
                match check.verdict {
                    Verdict::Pass | Verdict::Fail => {
                        assert!(check.margin.is_some());
                        assert_ne!(kind, SuiteKind::Reported);
                    }
                    Verdict::Reported => {
                        assert!(check.sample_size.is_some());
                        assert_ne!(kind, SuiteKind::Hard);
                    }
                }
            }
        }
    }
}
