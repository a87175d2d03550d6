use std::time::Instant;

use treemax_core::verify::{run_scenario, ScenarioConfig, Verdict, SCENARIOS};

#[test]
fn every_scenario_reaches_its_expected_verdict() {
    let cfg = ScenarioConfig::default();
    for id in SCENARIOS {
        let t = Instant::now();
        let rep = run_scenario(id, &cfg).unwrap();
        let failed: Vec<_> = rep.checks.iter().filter(|c| !c.pass).map(|c| format!("{} [{}]", c.name, c.detail)).collect();
        eprintln!("{id}: {:?} in {:.1?}; not passing: {failed:?}", rep.verdict, t.elapsed());
        let want = if id == "llogl" { Verdict::Exploratory } else { Verdict::Pass };
        assert_eq!(rep.verdict, want, "{id}: {failed:?}");
    }
}

#[test]
fn unknown_scenario_is_an_error() {
    assert!(run_scenario("nosuch", &ScenarioConfig::default()).is_err());
}
