//! Command-line front end. Every command resolves the shared global
//! flags (rotation number, roof, precision, seed), runs one library
//! operation, and writes JSON or CSV to stdout or `--out`.
//!
//! Exit codes: 0 when every hard check passes (or the command has no
//! checks), 1 when a verification suite records a hard failure, 2 on
//! usage or configuration errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use flowlab::circle::{orbit_spacing_check, CirclePoint, SetParams};
use flowlab::flow::{flow, FlowPoint, FlowStep};
use flowlab::harness::fixtures::AlphaSpec;
use flowlab::harness::{
    run_suite, sample_pairs, shear_sweep, suite_meta, sweep_csv, HarnessError, SuiteConfig,
    SuiteReport, REGISTRY,
};
use flowlab::numeration::{classify_alpha, ostrowski_expand, ContinuedFraction, DioClass};
use flowlab::roof::{
    birkhoff_derivative_sum, birkhoff_sum, BirkhoffResult, EvalContext, RoofFunction, RoofSpec,
};
use flowlab::scalar::{decimal_string, parse_decimal, Scalar};
use flowlab::shear::{
    classify_pair, large_shearing_check, small_shearing_search, LargeShearOutcome, PairClass,
    PairReport, ShearConstants, SmallShearOutcome,
};

#[derive(Parser)]
#[command(name = "flowlab", version, about = "Special flows over irrational rotations: numeration, Birkhoff sums, shearing, verification")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Globals {
    /// Rotation number: golden[:depth], silver[:depth], mixed[:depth],
    /// make:SEED:DEPTH, cf:a1,a2,..., or a fixture file path.
    #[arg(long, global = true, default_value = "golden:30")]
    alpha: String,
    /// Roof function as inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    roof: Option<String>,
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    precision: u32,
    /// PRNG seed (ChaCha8; reports are reproducible across platforms).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Convergents, partial quotients, and ||q_n a|| of the rotation number.
    Cf {
        /// Largest convergent index to print.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Run a Diophantine class test on the rotation number.
    ClassifyAlpha {
        /// Class name: d1, d1a, d2, or d3.
        #[arg(long)]
        class: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Ostrowski digits of a non-negative integer.
    Ostrowski {
        /// The integer to expand.
        m: String,
    },
    /// Exact three-distance spacing report for an orbit segment.
    Orbit {
        /// Base point on the circle (decimal or p/q).
        #[arg(long, default_value = "0")]
        x: String,
        /// Convergent index n; the segment has q_n points.
        #[arg(long)]
        n: usize,
    },
    /// Birkhoff sum of the roof (or its derivative) along the rotation.
    Birkhoff {
        #[arg(long, default_value = "0.3")]
        x: String,
        /// Window length; negative sums backward.
        #[arg(long)]
        m: i64,
        /// Sum the roof derivative instead of the roof.
        #[arg(long)]
        derivative: bool,
    },
    /// Move a point of the special flow; optionally dump a trajectory.
    Flow {
        #[arg(long, default_value = "0.3")]
        x: String,
        /// Initial height (must be below the roof).
        #[arg(long, default_value = "0")]
        s: String,
        /// Total flow time (decimal or p/q; may be negative).
        #[arg(long)]
        t: String,
        /// Split the motion into this many equal steps and report each.
        #[arg(long, default_value_t = 1)]
        steps: u32,
    },
    /// Classify a pair of base points, or sample pairs of a class.
    Pair {
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Convergent order k of the classification.
        #[arg(long)]
        order: usize,
        /// Sample this class instead of classifying --x/--y.
        #[arg(long)]
        sample: Option<String>,
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
    /// Small- or large-shearing analysis of a pair, or a sweep summary.
    Shear {
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Convergent order k of the pair.
        #[arg(long)]
        order: usize,
        /// Landing tolerance for the small-shearing search.
        #[arg(long, default_value = "0.05")]
        zeta: String,
        /// Run the large-shearing decomposition instead of the search.
        #[arg(long)]
        large: bool,
        /// Sweep: sample pairs of every class at --order and summarize.
        #[arg(long)]
        sweep: bool,
        /// Pairs per class for --sweep.
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
    /// Run verification suites and report hard/reported verdicts.
    Verify {
        /// JSON config file with the SuiteConfig schema.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Suite names to run (repeatable); defaults to the registry.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Cap per-suite sample counts for a quick pass.
        #[arg(long)]
        samples: Option<u64>,
        /// List registered suites and exit.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Decimal ("0.25", "2.5e-3") or fraction ("1/4") argument.
fn parse_rational_arg(s: &str) -> Result<BigRational, HarnessError> {
    let parsed = if s.contains('/') {
        s.trim().parse::<BigRational>().ok()
    } else {
        parse_decimal(s)
    };
    parsed.ok_or_else(|| HarnessError::Config(format!("`{s}` is not a decimal or p/q rational")))
}

fn parse_point_arg(s: &str) -> Result<CirclePoint, HarnessError> {
    let v = parse_rational_arg(s)?;
    if v.is_negative() || v >= BigRational::from_integer(1.into()) {
        return Err(HarnessError::Config(format!(
            "`{s}` is not in [0, 1); base points live on the unit circle"
        )));
    }
    Ok(CirclePoint::exact(v))
}

struct Resolved {
    cf: ContinuedFraction,
    roof: RoofFunction,
    ctx: EvalContext,
}

impl Globals {
    fn resolve(&self) -> Result<Resolved, HarnessError> {
        let cf = AlphaSpec::parse(&self.alpha)?.resolve()?;
        if self.precision == 0 {
            return Err(HarnessError::Config("precision must be positive".into()));
        }
        let roof = match &self.roof {
            None => RoofFunction::normalized_default(),
            Some(text) => {
                let body = if text.trim_start().starts_with('{') {
                    text.clone()
                } else {
                    fs::read_to_string(text)?
                };
                let spec: RoofSpec = serde_json::from_str(&body)?;
                RoofFunction::from_spec(&spec)?
            }
        };
        let mut ctx = EvalContext::with_precision(self.precision);
        ctx.max_prec = ctx.max_prec.max(self.precision);
        Ok(Resolved { cf, roof, ctx })
    }

    fn emit(&self, payload: &str) -> Result<(), HarnessError> {
        match &self.out {
            Some(path) => fs::write(path, payload.as_bytes())?,
            None => println!("{payload}"),
        }
        Ok(())
    }

    fn emit_value(&self, v: &Value) -> Result<(), HarnessError> {
        self.emit(&serde_json::to_string_pretty(v)?)
    }

    fn want_csv(&self) -> bool {
        self.format == "csv"
    }
}

fn rational_json(r: &BigRational) -> Value {
    json!({ "value": decimal_string(r, 40), "exact": format!("{}/{}", r.numer(), r.denom()) })
}

fn scalar_json(s: &Scalar, prec: u32) -> Value {
    let itv = s.as_interval(prec);
    json!({
        "value": decimal_string(&itv.mid_rational(), 40),
        "err": decimal_string(&s.err_rational(), 60),
    })
}

fn point_json(p: &CirclePoint) -> Value {
    json!({
        "value": decimal_string(p.value(), 40),
        "err": decimal_string(p.err(), 60),
    })
}

fn birkhoff_json(r: &BirkhoffResult, prec: u32) -> Value {
    json!({
        "value": scalar_json(&r.value, prec),
        "window": r.m.to_string(),
        "terms": r.terms,
        "min_approach": decimal_string(&r.min_approach, 40),
    })
}

fn pair_class_arg(s: &str) -> Result<PairClass, HarnessError> {
    Ok(match s {
        "small" => PairClass::Small,
        "close" => PairClass::Close,
        "type_I" | "type_i" | "type1" => PairClass::TypeI,
        "type_II" | "type_ii" | "type2" => PairClass::TypeII,
        "same_orbit" => PairClass::SameOrbit,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown pair class `{other}` (small, close, type_I, type_II, same_orbit)"
            )))
        }
    })
}

fn pair_report_json(r: &PairReport) -> Value {
    json!({
        "order_k": r.order_k,
        "class": r.pair_class.name(),
        "d_k": {
            "value": decimal_string(&r.d_k.value, 40),
            "err": decimal_string(&r.d_k.err, 60),
        },
        "j0": r.j0.to_string(),
    })
}

fn small_shear_json(o: &SmallShearOutcome, prec: u32) -> Value {
    json!({
        "success": o.success,
        "ell0": o.ell0.to_string(),
        "m": o.m,
        "p": rational_json(&o.p),
        "residual": decimal_string(&o.residual, 40),
        "direction": format!("{:?}", o.direction),
        "difference": scalar_json(&o.difference, prec),
        "ell_cap": o.ell_cap.to_string(),
        "attempts": o.attempts,
        "x_window_ok": o.x_window_ok,
        "y_membership_ok": o.y_membership_ok,
    })
}

fn large_shear_json(o: &LargeShearOutcome, prec: u32) -> Value {
    json!({
        "r": o.r,
        "class": o.pair_class.name(),
        "delta": scalar_json(&o.delta, prec),
        "lower_ok": o.lower_ok,
        "upper_ok": o.upper_ok,
        "straddle_count": o.straddle_count,
        "decomposition_gap": decimal_string(&o.decomposition_gap, 60),
        "combined_err": decimal_string(&o.combined_err, 60),
    })
}

fn run(cli: &Cli) -> Result<ExitCode, HarnessError> {
    let g = &cli.globals;
    match &cli.command {
        Command::Cf { depth } => {
            let r = g.resolve()?;
            let top = depth.unwrap_or(r.cf.depth()).min(r.cf.depth());
            if g.want_csv() {
                let mut out = String::from("n,a_n,p_n,q_n,norm_q_alpha\n");
                for n in 0..=top {
                    let a = if n == 0 { 0 } else { r.cf.a(n) };
                    out.push_str(&format!(
                        "{n},{a},{},{},{}\n",
                        r.cf.p(n),
                        r.cf.q(n),
                        decimal_string(&r.cf.norm_q_alpha(n), 30)
                    ));
                }
                g.emit(out.trim_end())?;
            } else {
                let rows: Vec<Value> = (0..=top)
                    .map(|n| {
                        json!({
                            "n": n,
                            "a_n": if n == 0 { 0 } else { r.cf.a(n) },
                            "p_n": r.cf.p(n).to_string(),
                            "q_n": r.cf.q(n).to_string(),
                            "norm_q_alpha": decimal_string(&r.cf.norm_q_alpha(n), 30),
                        })
                    })
                    .collect();
                g.emit_value(&json!({
                    "label": r.cf.label(),
                    "depth": r.cf.depth(),
                    "alpha": decimal_string(&r.cf.value(), 40),
                    "quotients": r.cf.quotients(),
                    "convergents": rows,
                }))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ClassifyAlpha { class, depth } => {
            let r = g.resolve()?;
            let class = DioClass::parse(class)
                .ok_or_else(|| HarnessError::Config(format!("unknown class `{class}`")))?;
            let verdict = classify_alpha(&r.cf, class, depth.unwrap_or(r.cf.depth()))?;
            if g.want_csv() {
                g.emit(&format!(
                    "class,depth,passed,constant\n{},{},{},{}",
                    verdict.class_name,
                    verdict.depth,
                    verdict.passed,
                    verdict.constant.as_deref().unwrap_or("")
                ))?;
            } else {
                g.emit_value(&serde_json::to_value(&verdict)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ostrowski { m } => {
            let r = g.resolve()?;
            let m: BigInt = m
                .parse()
                .map_err(|_| HarnessError::Config(format!("`{m}` is not an integer")))?;
            let digits = ostrowski_expand(&m, &r.cf)?;
            g.emit_value(&json!({
                "m": m.to_string(),
                "digits": digits.digits,
                "support": digits.support(),
                "legal": digits.is_legal(&r.cf),
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Orbit { x, n } => {
            let r = g.resolve()?;
            let x = parse_point_arg(x)?;
            let report = orbit_spacing_check(&x, &r.cf, *n);
            if g.want_csv() {
                let mut out = String::from("gap,multiplicity\n");
                for (gap, mult) in &report.distinct_gaps {
                    out.push_str(&format!("{gap},{mult}\n"));
                }
                g.emit(out.trim_end())?;
            } else {
                g.emit_value(&serde_json::to_value(&report)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Birkhoff { x, m, derivative } => {
            let r = g.resolve()?;
            let x = parse_point_arg(x)?;
            let m = BigInt::from(*m);
            let alpha = r.cf.value();
            let result = if *derivative {
                birkhoff_derivative_sum(&r.roof, &x, &m, &alpha, &r.ctx)?
            } else {
                birkhoff_sum(&r.roof, &x, &m, &alpha, &r.ctx)?
            };
            g.emit_value(&birkhoff_json(&result, r.ctx.prec))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Flow { x, s, t, steps } => {
            let r = g.resolve()?;
            if *steps == 0 {
                return Err(HarnessError::Config("steps must be at least 1".into()));
            }
            let x = parse_point_arg(x)?;
            let s = Scalar::Exact(parse_rational_arg(s)?);
            let total = parse_rational_arg(t)?;
            let step_time =
                Scalar::Exact(&total / BigRational::from_integer(BigInt::from(*steps)));
            let mut p = FlowPoint::new(x, s, &r.roof, &r.ctx).map_err(HarnessError::from)?;
            let mut elapsed = BigRational::zero();
            let mut base_steps = BigInt::zero();
            let mut rows: Vec<(u32, BigRational, FlowStep)> = Vec::new();
            for k in 1..=*steps {
                let step = flow(&r.roof, &p, &step_time, &r.cf, &r.ctx)?;
                elapsed += &total / BigRational::from_integer(BigInt::from(*steps));
                base_steps += &step.m;
                p = step.target.clone();
                rows.push((k, elapsed.clone(), step));
            }
            if g.want_csv() {
                let mut out = String::from("n,t,x_value,x_err,s,m\n");
                for (k, t_k, step) in &rows {
                    out.push_str(&format!(
                        "{k},{},{},{},{},{}\n",
                        decimal_string(t_k, 30),
                        decimal_string(step.target.x.value(), 40),
                        decimal_string(step.target.x.err(), 60),
                        decimal_string(&step.target.s.as_interval(r.ctx.prec).mid_rational(), 40),
                        step.m
                    ));
                }
                g.emit(out.trim_end())?;
            } else {
                let last = &rows.last().expect("steps >= 1").2;
                g.emit_value(&json!({
                    "target": {
                        "x": point_json(&last.target.x),
                        "s": scalar_json(&last.target.s, r.ctx.prec),
                    },
                    "base_steps": base_steps.to_string(),
                    "trajectory": rows.iter().map(|(k, t_k, step)| json!({
                        "n": k,
                        "t": decimal_string(t_k, 30),
                        "x": point_json(&step.target.x),
                        "s": scalar_json(&step.target.s, r.ctx.prec),
                        "m": step.m.to_string(),
                    })).collect::<Vec<_>>(),
                }))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pair { x, y, order, sample, count } => {
            let r = g.resolve()?;
            match (sample, x, y) {
                (Some(class), None, None) => {
                    let class = pair_class_arg(class)?;
                    let pairs = sample_pairs(&r.cf, *order, class, *count, g.seed)?;
                    let mut lines = Vec::with_capacity(pairs.len());
                    for p in &pairs {
                        let mut v = pair_report_json(&p.report);
                        v["x"] = point_json(&p.x);
                        v["y"] = point_json(&p.y);
                        lines.push(serde_json::to_string(&v)?);
                    }
                    g.emit(&lines.join("\n"))?;
                    Ok(ExitCode::SUCCESS)
                }
                (None, Some(x), Some(y)) => {
                    let x = parse_point_arg(x)?;
                    let y = parse_point_arg(y)?;
                    let report = classify_pair(&x, &y, &r.cf, *order)?;
                    g.emit_value(&pair_report_json(&report))?;
                    Ok(ExitCode::SUCCESS)
                }
                _ => Err(HarnessError::Config(
                    "pass either --sample CLASS or both --x and --y".into(),
                )),
            }
        }
        Command::Shear { x, y, order, zeta, large, sweep, count } => {
            let r = g.resolve()?;
            let zeta = parse_rational_arg(zeta)?;
            if !zeta.is_positive() {
                return Err(HarnessError::Config("zeta must be positive".into()));
            }
            if *sweep {
                let rows = shear_sweep(&r.roof, &r.cf, &[*order], *count, &zeta, g.seed, &r.ctx)?;
                g.emit(sweep_csv(&rows).trim_end())?;
                return Ok(ExitCode::SUCCESS);
            }
            let (Some(x), Some(y)) = (x, y) else {
                return Err(HarnessError::Config(
                    "pass --x and --y (or --sweep for a class summary)".into(),
                ));
            };
            let x = parse_point_arg(x)?;
            let y = parse_point_arg(y)?;
            if *large {
                let outcome = large_shearing_check(
                    &r.roof,
                    &x,
                    &y,
                    &r.cf,
                    *order,
                    &SetParams::default(),
                    &r.ctx,
                )?;
                let c = ShearConstants::derive(&r.roof, &r.cf);
                let mut v = large_shear_json(&outcome, r.ctx.prec);
                v["d1"] = rational_json(&c.d1);
                v["d2"] = rational_json(&c.d2);
                g.emit_value(&v)?;
            } else {
                let outcome =
                    small_shearing_search(&r.roof, &x, &y, &r.cf, *order, &zeta, &r.ctx)?;
                g.emit_value(&small_shear_json(&outcome, r.ctx.prec))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, suites, samples, list } => {
            if *list {
                let rows: Vec<Value> = REGISTRY
                    .iter()
                    .map(|m| {
                        json!({
                            "suite": m.name,
                            "kind": format!("{:?}", m.kind),
                            "summary": m.summary,
                        })
                    })
                    .collect();
                g.emit_value(&Value::Array(rows))?;
                return Ok(ExitCode::SUCCESS);
            }
            let mut cfg = match config {
                Some(path) => serde_json::from_str::<SuiteConfig>(&fs::read_to_string(path)?)?,
                None => SuiteConfig::new(
                    &g.alpha,
                    REGISTRY.iter().map(|m| m.name.to_string()).collect(),
                ),
            };
            if !suites.is_empty() {
                for name in suites {
                    suite_meta(name)
                        .ok_or_else(|| HarnessError::UnknownSuite(name.clone()))?;
                }
                cfg.suites = suites.clone();
            }
            if config.is_none() {
                cfg.precision_bits = g.precision;
                cfg.max_precision_bits = cfg.max_precision_bits.max(g.precision);
                cfg.seed = g.seed;
                if let Some(text) = &g.roof {
                    let body = if text.trim_start().starts_with('{') {
                        text.clone()
                    } else {
                        fs::read_to_string(text)?
                    };
                    cfg.roof = Some(serde_json::from_str(&body)?);
                }
            }
            if samples.is_some() {
                cfg.samples = *samples;
            }
            cfg.validate()?;
            let mut reports: Vec<SuiteReport> = Vec::new();
            let mut config_errors: Vec<Value> = Vec::new();
            for suite in cfg.suites.clone() {
                match run_suite(&cfg, &suite) {
                    Ok(rep) => reports.push(rep),
                    Err(e) => config_errors.push(json!({ "suite": suite, "error": e.to_string() })),
                }
            }
            let hard_total: u64 = reports.iter().map(|r| r.hard_total).sum();
            let hard_failures: u64 = reports.iter().map(|r| r.hard_failures).sum();
            let summary = json!({
                "suites_run": reports.len(),
                "hard_total": hard_total,
                "hard_failures": hard_failures,
                "errors": config_errors,
                "reports": reports,
            });
            if g.want_csv() {
                let mut out = String::from("suite,check,verdict,margin,sample_size\n");
                for rep in &reports {
                    for c in &rep.checks {
                        out.push_str(&format!(
                            "{},{},{:?},{},{}\n",
                            rep.suite,
                            c.name,
                            c.verdict,
                            c.margin.as_deref().unwrap_or(""),
                            c.sample_size.map(|n| n.to_string()).unwrap_or_default()
                        ));
                    }
                }
                g.emit(out.trim_end())?;
            } else {
                g.emit_value(&summary)?;
            }
            if !config_errors.is_empty() {
                return Ok(ExitCode::from(2));
            }
            if hard_failures > 0 {
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
