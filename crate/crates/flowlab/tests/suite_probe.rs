use flowlab::harness::{run_suite, SuiteConfig};

fn probe(alpha: &str, suite: &str, samples: Option<u64>, shear_roof: bool) {
    let mut cfg = SuiteConfig::new(alpha, vec![suite.to_string()]);
    cfg.samples = samples;
    if shear_roof {
        cfg.roof = Some(flowlab::roof::RoofFunction::shear_example().to_spec());
    }
    match run_suite(&cfg, suite) {
        Ok(rep) => {
            println!(
                "{suite:24} hard {}/{} fail {} reported {} retries {} wall {:?}",
                rep.hard_total - rep.hard_failures,
                rep.hard_total,
                rep.hard_failures,
                rep.reported_total,
                rep.retries,
                std::time::Duration::from_millis(rep.wall_time_ms)
            );
            for c in &rep.checks {
                println!("    [{:?}] {} :: {}", c.verdict, c.name, c.output);
            }
        }
        Err(e) => println!("{suite:24} ERROR {e}"),
    }
}

#[test]
#[ignore]
fn probe_large_full_scale() {
    probe("golden:25", "large-shearing", None, true);
}

#[test]
#[ignore]
fn probe_medium_scale() {
    probe("golden:25", "convergent-inequality", None, false);
    probe("golden:25", "ostrowski", None, false);
    probe("golden:25", "denjoy-koksma", None, false);
    probe("golden:25", "three-distance", None, false);
    probe("golden:25", "distance-estimate", None, false);
    probe("golden:25", "flow-basic", None, false);
    probe("golden:25", "measure-preservation", None, false);
    probe("golden:25", "singular-denjoy-koksma", None, false);
    probe("golden:25", "diophantine", None, false);
}
