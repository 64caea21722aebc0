use std::collections::BTreeSet;

use byzlab::model::{AgentId, FaultClass, Scenario};
use byzlab::verifier::{bound_oracle, judge, sampled_search, search_all_traitor_sets, StrategySpace, VerifyError};

fn template(n: usize, protocol: &str, bound: u32, decision: &str, classes: &[FaultClass]) -> Scenario {
    let classes: Vec<String> = classes.iter().map(|c| format!("\"{c}\"")).collect();
    Scenario::from_json(&format!(
        r#"{{"n":{n},"protocol":"{protocol}","bound":{bound},"instigator":0,"decision":{decision},
            "allowed_faults":[{}]}}"#,
        classes.join(",")
    ))
    .unwrap()
}

fn class_sets() -> Vec<Vec<FaultClass>> {
    use FaultClass::*;
    vec![
        vec![Corrupt],
        vec![Drop],
        vec![Corrupt, Drop],
        vec![Spurious],
        vec![Corrupt, Spurious],
        vec![Drop, Spurious],
        vec![Corrupt, Drop, Spurious],
    ]
}

/// The protocol the oracle's table pairs with each fault model: oral
/// messages whenever spurious faults are possible.
fn matching_protocol(classes: &[FaultClass]) -> (&'static str, &'static [&'static str]) {
    if classes.contains(&FaultClass::Spurious) {
        ("om", &["0", "1"])
    } else if classes.contains(&FaultClass::Drop) {
        ("mkn", &["\"attack\"", "\"retreat\""])
    } else {
        ("one_round_mm", &["\"attack\"", "\"retreat\""])
    }
}

#[test]
fn oracle_agrees_with_exhaustive_search() {
    let cap = 2_000_000;
    let mut compared = 0;
    for classes in class_sets() {
        let (protocol, decisions) = matching_protocol(&classes);
        for n in 3..=4 {
            for bound in 1..=2u32 {
                let expected = bound_oracle(n, bound, &classes.iter().copied().collect());
                let mut all_pass = true;
                let mut skipped = false;
                for decision in decisions {
                    let t = template(n, protocol, bound, decision, &classes);
                    match search_all_traitor_sets(&t, cap) {
                        Ok(report) => all_pass &= report.all_pass,
                        Err(VerifyError::SearchSpaceTooLarge { .. }) => skipped = true,
                        Err(e) => panic!("{e}"),
                    }
                }
                if skipped {
                    continue;
                }
                compared += 1;
                assert_eq!(
                    all_pass, expected.feasible,
                    "n={n} bound={bound} classes={classes:?}: search {all_pass}, oracle {}",
                    expected.summary()
                );
            }
        }
    }
    assert!(compared >= 15, "only {compared} configurations compared");
}

#[test]
fn agreement_is_reached_within_the_oracle_horizon() {
    for classes in class_sets() {
        let (protocol, decisions) = matching_protocol(&classes);
        let n = 4;
        let expected = bound_oracle(n, 1, &classes.iter().copied().collect());
        let Some(horizon) = expected.horizon else { continue };
        let t = template(n, protocol, 1, decisions[0], &classes);
        assert_eq!(t.horizon(), horizon, "classes {classes:?}");
        let report = search_all_traitor_sets(&t, 1_000_000).unwrap();
        assert!(report.all_pass);
    }
}

#[test]
fn om_with_seven_agents_survives_sampled_pairs_of_traitors() {
    let classes = [FaultClass::Corrupt, FaultClass::Drop, FaultClass::Spurious];
    for value in ["0", "1"] {
        let t = template(7, "om", 2, value, &classes);
        for pair in [[0, 1], [1, 2], [5, 6], [0, 6]] {
            let traitors: BTreeSet<AgentId> = pair.iter().map(|&i| AgentId(i)).collect();
            let report = sampled_search(&t, &traitors, 150, 9).unwrap();
            assert!(report.all_pass, "traitors {pair:?}: {:?}", report.worst.map(|w| w.verdict));
            assert_eq!(report.scenarios_checked, 150);
        }
    }
}

#[test]
fn om_with_three_agents_fails_for_every_lieutenant_traitor() {
    let t = template(3, "om", 1, "1", &[FaultClass::Corrupt, FaultClass::Drop, FaultClass::Spurious]);
    for traitor in 1..3 {
        let traitors = BTreeSet::from([AgentId(traitor)]);
        let report = byzlab::verifier::exhaustive_search(&t, &traitors, 1_000_000).unwrap();
        let cx = report.worst.expect("counterexample");
        assert!(!cx.verdict.passes());
        let (_, replay) = judge(&cx.scenario).unwrap();
        assert_eq!(replay, cx.verdict);
    }
}

#[test]
fn space_size_is_computed_before_enumerating() {
    let t = template(10, "om", 3, "1", &[FaultClass::Corrupt, FaultClass::Drop, FaultClass::Spurious]);
    let traitors: BTreeSet<AgentId> = (0..3).map(AgentId).collect();
    let space = StrategySpace::new(&t, &traitors).unwrap();
    // Three traitors with nine outgoing channels each.
    let per_channel = space.options_per_channel() as u128;
    assert_eq!(space.size(), per_channel.pow(27));
    match byzlab::verifier::exhaustive_search(&t, &traitors, 10_000_000) {
        Err(VerifyError::SearchSpaceTooLarge { cap, .. }) => assert_eq!(cap, 10_000_000),
        other => panic!("expected a size error, got {other:?}"),
    }
}
