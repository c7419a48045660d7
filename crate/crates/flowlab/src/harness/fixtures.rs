//! Rotation-number fixtures and the textual spec grammar shared by the
//! CLI and the suite configs.
//!
//! Grammar accepted by [`AlphaSpec::parse`]:
//!
//! * `golden`, `silver`, `mixed`, optionally with `:depth` (for example
//!   `golden:30`);
//! * `make:SEED:DEPTH` for the sparse-jump construction;
//! * `cf:a1,a2,...` for explicit partial quotients;
//! * anything else is read as a path to a JSON fixture file
//!   (`{"quotients":[...], "label":"..."}`).

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use rand_core::RngCore;

use crate::numeration::{make_d_alpha, CfFixtureSpec, ContinuedFraction, NumerationError};

use super::HarnessError;

/// Quotient pattern behind the `mixed` fixture: bounded but not
/// constant, so it exercises carries the all-ones fixtures miss.
const MIXED_PATTERN: [u64; 10] = [1, 2, 1, 1, 3, 1, 1, 2, 1, 4];

pub fn golden(depth: usize) -> ContinuedFraction {
    ContinuedFraction::from_quotients(vec![1; depth], Some("golden".into()))
        .expect("all-ones quotients are valid")
}

pub fn silver(depth: usize) -> ContinuedFraction {
    ContinuedFraction::from_quotients(vec![2; depth], Some("silver".into()))
        .expect("all-twos quotients are valid")
}

pub fn mixed(depth: usize) -> ContinuedFraction {
    let quotients: Vec<u64> = MIXED_PATTERN.iter().cycle().take(depth).copied().collect();
    ContinuedFraction::from_quotients(quotients, Some("mixed".into()))
        .expect("pattern quotients are valid")
}

/// A random continued fraction with quotients uniform in `lo..=hi`.
pub fn random_cf<R: RngCore>(
    rng: &mut R,
    lo: u64,
    hi: u64,
    depth: usize,
    label: &str,
) -> ContinuedFraction {
    debug_assert!(lo >= 1 && hi >= lo);
    let span = hi - lo + 1;
    let quotients: Vec<u64> = (0..depth).map(|_| lo + rng.next_u64() % span).collect();
    ContinuedFraction::from_quotients(quotients, Some(label.into()))
        .expect("positive quotients are valid")
}

/// A parsed rotation-number specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphaSpec {
    Golden { depth: usize },
    Silver { depth: usize },
    Mixed { depth: usize },
    Make { seed: u64, depth: usize },
    Quotients(Vec<u64>),
    File(String),
}

impl AlphaSpec {
    pub fn parse(s: &str) -> Result<AlphaSpec, HarnessError> {
        let s = s.trim();
        let bad = |msg: String| HarnessError::Config(msg);
        let parse_depth = |rest: Option<&str>, default: usize| -> Result<usize, HarnessError> {
            match rest {
                None => Ok(default),
                Some(d) => d
                    .parse::<usize>()
                    .map_err(|_| bad(format!("bad depth in alpha spec `{s}`"))),
            }
        };
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match head {
            "golden" => Ok(AlphaSpec::Golden { depth: parse_depth(rest, 25)? }),
            "silver" => Ok(AlphaSpec::Silver { depth: parse_depth(rest, 18)? }),
            "mixed" => Ok(AlphaSpec::Mixed { depth: parse_depth(rest, 20)? }),
            "make" => {
                let rest = rest.ok_or_else(|| bad("make needs `make:SEED:DEPTH`".into()))?;
                let (seed, depth) = rest
                    .split_once(':')
                    .ok_or_else(|| bad("make needs `make:SEED:DEPTH`".into()))?;
                let seed = seed
                    .parse::<u64>()
                    .map_err(|_| bad(format!("bad seed in alpha spec `{s}`")))?;
                let depth = depth
                    .parse::<usize>()
                    .map_err(|_| bad(format!("bad depth in alpha spec `{s}`")))?;
                Ok(AlphaSpec::Make { seed, depth })
            }
            "cf" => {
                let rest = rest.ok_or_else(|| bad("cf needs `cf:a1,a2,...`".into()))?;
                let quotients = rest
                    .split(',')
                    .map(|t| t.trim().parse::<u64>())
                    .collect::<Result<Vec<u64>, _>>()
                    .map_err(|_| bad(format!("bad quotient list in alpha spec `{s}`")))?;
                Ok(AlphaSpec::Quotients(quotients))
            }
            _ => Ok(AlphaSpec::File(s.to_string())),
        }
    }

    pub fn resolve(&self) -> Result<ContinuedFraction, HarnessError> {
        match self {
            AlphaSpec::Golden { depth } => check_depth(*depth).map(|_| golden(*depth)),
            AlphaSpec::Silver { depth } => check_depth(*depth).map(|_| silver(*depth)),
            AlphaSpec::Mixed { depth } => check_depth(*depth).map(|_| mixed(*depth)),
            AlphaSpec::Make { seed, depth } => Ok(make_d_alpha(*seed, *depth)?),
            AlphaSpec::Quotients(qs) => {
                Ok(ContinuedFraction::from_quotients(qs.clone(), Some("cf".into()))?)
            }
            AlphaSpec::File(path) => load_fixture(Path::new(path)),
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Golden { depth } => write!(out, "golden:{depth}"),
            AlphaSpec::Silver { depth } => write!(out, "silver:{depth}"),
            AlphaSpec::Mixed { depth } => write!(out, "mixed:{depth}"),
            AlphaSpec::Make { seed, depth } => write!(out, "make:{seed}:{depth}"),
            AlphaSpec::Quotients(qs) => {
                let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
                write!(out, "cf:{}", list.join(","))
            }
            AlphaSpec::File(path) => write!(out, "{path}"),
        }
    }
}

fn check_depth(depth: usize) -> Result<(), HarnessError> {
    if depth == 0 {
        return Err(HarnessError::Config("fixture depth must be positive".into()));
    }
    Ok(())
}

pub fn load_fixture(path: &Path) -> Result<ContinuedFraction, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Fixture(format!("{}: {e}", path.display())))?;
    let spec: CfFixtureSpec = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Fixture(format!("{}: {e}", path.display())))?;
    Ok(ContinuedFraction::from_fixture(&spec)?)
}

pub fn save_fixture(cf: &ContinuedFraction, path: &Path) -> Result<(), HarnessError> {
    let spec = cf.to_fixture();
    let text = serde_json::to_string_pretty(&spec)?;
    std::fs::write(path, text)
        .map_err(|e| HarnessError::Fixture(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// The six fixtures of the Ostrowski round-trip sweep. Every one has
/// q_N > 10^5 so all m <= 10^5 are representable.
pub fn ostrowski_fixtures<R: RngCore>(rng: &mut R) -> Result<Vec<ContinuedFraction>, NumerationError> {
    Ok(vec![
        golden(30),
        silver(20),
        mixed(25),
        make_d_alpha(0, 20)?,
        make_d_alpha(1, 20)?,
        random_cf(rng, 1, 10, 26, "rand-ostrowski"),
    ])
}

/// Ten small-quotient fixtures for the exact orbit-spacing sweeps.
pub fn spacing_fixtures<R: RngCore>(rng: &mut R) -> Vec<ContinuedFraction> {
    let mut out = vec![golden(21), silver(21)];
    for i in 0..8 {
        out.push(random_cf(rng, 1, 2, 21, &format!("rand-spacing-{i}")));
    }
    out
}

/// Largest index n <= n_cap with q_n <= q_cap.
pub fn max_desk_order(cf: &ContinuedFraction, n_cap: usize, q_cap: u64) -> usize {
    let cap = BigInt::from(q_cap);
    let mut best = 0;
    for n in 0..=n_cap.min(cf.depth()) {
        if *cf.q(n) <= cap {
            best = n;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_grammar_round_trips() {
        for text in ["golden:25", "silver:18", "mixed:20", "make:7:40", "cf:1,2,3"] {
            let spec = AlphaSpec::parse(text).unwrap();
            assert_eq!(spec.to_string(), text);
            spec.resolve().unwrap();
        }
        assert_eq!(AlphaSpec::parse("golden").unwrap(), AlphaSpec::Golden { depth: 25 });
        assert!(matches!(AlphaSpec::parse("some/file.json").unwrap(), AlphaSpec::File(_)));
        assert!(AlphaSpec::parse("make:oops").is_err());
        assert!(AlphaSpec::parse("cf:1,x").is_err());
    }

    #[test]
    fn fixture_file_round_trips() {
        let dir = std::env::temp_dir().join("flowlab-fixture-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cf.json");
        let cf = mixed(12);
        save_fixture(&cf, &path).unwrap();
        let back = load_fixture(&path).unwrap();
        assert_eq!(back.quotients(), cf.quotients());
        assert_eq!(back.label(), cf.label());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn ostrowski_fixtures_reach_the_sweep_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let fixtures = ostrowski_fixtures(&mut rng).unwrap();
        assert_eq!(fixtures.len(), 6);
        for cf in &fixtures {
            assert!(
                *cf.q(cf.depth()) > BigInt::from(100_000u32),
                "{:?} too shallow",
                cf.label()
            );
        }
    }

    #[test]
    fn desk_order_respects_caps() {
        let cf = golden(25);
        assert_eq!(max_desk_order(&cf, 20, 12_000), 20);
        assert_eq!(max_desk_order(&cf, 25, 12_000), 20);
        assert_eq!(max_desk_order(&cf, 25, 2), 2);
    }

    use rand_core::SeedableRng;
}
