// Temporary profiling probe; removed once the acceptance suite lands.

use std::time::Instant;

use flowlab::harness::fixtures::AlphaSpec;
use flowlab::harness::sample_pairs;
use flowlab::roof::{EvalContext, RoofFunction};
use flowlab::scalar::parse_decimal;
use flowlab::shear::{small_shearing_search, PairClass};

#[test]
#[ignore]
fn profile_small_shearing_stages() {
    for spec in ["cf:1,2,3,4,60,2,3,1,2,3,4,2,1,3,2,4,1,2", "cf:1,2,3,4,60,40,2,2,3,1,2,2,3,2"] {
        let cf = AlphaSpec::parse(spec).unwrap().resolve().unwrap();
        for n in 0..cf.depth().min(9) {
            print!(" q{n}={}", cf.q(n));
        }
        println!();
        let order = 4;
        let f = RoofFunction::normalized_default();
        let ctx = EvalContext::default();
        let zeta = parse_decimal("0.05").unwrap();
        for class in [PairClass::Small, PairClass::Close] {
            let t = Instant::now();
            let pairs = sample_pairs(&cf, order, class, 3, 99).unwrap();
            println!("  {:?} sample_pairs: {:?}", class, t.elapsed());
            for pair in &pairs {
                let t = Instant::now();
                let o = small_shearing_search(&f, &pair.x, &pair.y, &cf, order, &zeta, &ctx)
                    .unwrap();
                println!(
                    "    d={:.3e} m={} ell0={} attempts={} success={} search {:?}",
                    pair.report.d_k.value.to_string().parse::<f64>().unwrap_or(0.0),
                    o.m,
                    o.ell0,
                    o.attempts,
                    o.success,
                    t.elapsed()
                );
            }
        }
    }
}
