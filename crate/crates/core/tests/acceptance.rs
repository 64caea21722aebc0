//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use byzlab::model::{AgentId, Decision, Scenario};
use byzlab::mpc::{
    default_alphas, eval_poly, evaluate_circuit, privacy_audit, reduction_matrix, Circuit, Fe, SeededCoins,
};
use byzlab::report::run_report;
use byzlab::verifier::{judge, judge_decisions, search_all_traitor_sets, traitor_sets, StrategySpace, DEFAULT_CAP};
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn template(n: usize, protocol: &str, bound: u32, instigator: usize, decision: &str, classes: &str) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{"n":{n},"protocol":"{protocol}","bound":{bound},"instigator":{instigator},
            "decision":{decision},"allowed_faults":[{classes}]}}"#
    ))
    .expect("valid template")
}

const ALL: &str = r#""corrupt","drop","spurious""#;
const CORRUPT_DROP: &str = r#""corrupt","drop""#;

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn om_bound() -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for instigator in 0..4 {
        for value in ["0", "1"] {
            let t = template(4, "om", 1, instigator, value, ALL);
            let report = search_all_traitor_sets(&t, DEFAULT_CAP).map_err(|e| e.to_string())?;
            checked += report.scenarios_checked;
            if let Some(cx) = report.worst {
                return Err(format!("violation: {:?}\n{}", cx.verdict, cx.scenario.to_json()));
            }
        }
    }
    // Every decision lands by round 2 (the horizon check inside the verdict),
    // spot-checked directly on the fault-free run.
    let (t, _) = judge(&template(4, "om", 1, 0, "1", ALL)).map_err(|e| e.to_string())?;
    if t.decisions.iter().any(|d| d.round > 2) {
        return Err("decision after round 2".into());
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("{checked} assignments, all pass, {:?}", started.elapsed()))
}

fn impossibility_witness() -> Outcome {
    let started = Instant::now();
    let t = template(3, "om", 1, 0, "1", ALL);
    let report = search_all_traitor_sets(&t, DEFAULT_CAP).map_err(|e| e.to_string())?;
    let cx = report.worst.ok_or("no counterexample at n=3")?;
    if cx.verdict.ic1 {
        return Err(format!("first counterexample does not violate IC1: {:?}", cx.verdict));
    }
    let reparsed = Scenario::from_json(&cx.scenario.to_json()).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        let (_, replay) = judge(&reparsed).map_err(|e| e.to_string())?;
        if replay != cx.verdict {
            return Err("replay verdict differs".into());
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!(
        "counterexample after {} assignments (traitors {:?}), replays exactly",
        report.scenarios_checked,
        cx.scenario.faults.iter().map(|f| f.channel.to_string()).collect::<Vec<_>>()
    ))
}

/// Enumerate every assignment in `space`, checking `ok` on each run.
fn sweep(space: &StrategySpace, ok: impl Fn(&Scenario) -> Result<(), String> + Sync) -> Result<u64, String> {
    let size = space.size() as u64;
    (0..size).into_par_iter().try_for_each(|i| ok(&space.scenario(i)))?;
    Ok(size)
}

fn one_round() -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for n in 2..=5 {
        let instigators: Vec<usize> = if n <= 4 { (0..n).collect() } else { vec![0] };
        for instigator in instigators {
            for decision in ["\"attack\"", "\"retreat\""] {
                let t = template(n, "one_round_mm", 0, instigator, decision, "\"corrupt\"");
                let everyone: BTreeSet<AgentId> = (0..n).map(AgentId).collect();
                let space = StrategySpace::new(&t, &everyone).map_err(|e| e.to_string())?;
                checked += sweep(&space, |s| {
                    let (tr, v) = judge_decisions(s).map_err(|e| e.to_string())?;
                    let unanimous = tr.decisions.windows(2).all(|w| w[0].decision == w[1].decision);
                    let one_round = tr.rounds.len() == 1 && tr.decisions.iter().all(|d| d.round == 1);
                    if v.passes() && one_round && unanimous {
                        Ok(())
                    } else {
                        Err(format!("violation {v:?}\n{}", s.to_json()))
                    }
                })?;
            }
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!("{checked} corrupt-only assignments, 1 round each, {:?}", started.elapsed()))
}

fn mkn_theorem() -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for (n, k) in [(3usize, 2u32), (4, 1), (4, 3)] {
        for instigator in 0..n {
            for decision in ["\"attack\"", "\"retreat\""] {
                let t = template(n, "mkn", k, instigator, decision, CORRUPT_DROP);
                let report = search_all_traitor_sets(&t, DEFAULT_CAP).map_err(|e| e.to_string())?;
                checked += report.scenarios_checked;
                if let Some(cx) = report.worst {
                    return Err(format!("n={n} k={k}: {:?}\n{}", cx.verdict, cx.scenario.to_json()));
                }
            }
        }
    }
    within(Duration::from_secs(60), started)?;
    Ok(format!(
        "{checked} corrupt+drop assignments incl. k/n > 1/3, all agree by k+1, {:?}",
        started.elapsed()
    ))
}

fn retreat_lemma() -> Outcome {
    let mut checked = 0;
    for n in 2..=4usize {
        for k in 0..=3u32 {
            for instigator in 0..n {
                let t = template(n, "mkn", k, instigator, "\"retreat\"", CORRUPT_DROP);
                for traitors in traitor_sets(n, (k as usize).min(n)) {
                    let space = StrategySpace::new(&t, &traitors).map_err(|e| e.to_string())?;
                    checked += sweep(&space, |s| {
                        let (tr, _) = judge_decisions(s).map_err(|e| e.to_string())?;
                        if tr.decisions.iter().all(|d| d.decision == Decision::Retreat) {
                            Ok(())
                        } else {
                            Err(format!("non-retreat decision\n{}", s.to_json()))
                        }
                    })?;
                }
            }
        }
    }
    Ok(format!("{checked} assignments, every agent retreats"))
}

/// Plain field evaluation, independent of the sharing machinery.
fn plain(circuit: &Circuit, inputs: &BTreeMap<usize, Vec<u64>>) -> Vec<u64> {
    let p = circuit.modulus;
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    let mut wires = Vec::new();
    let mut out = Vec::new();
    for gate in &circuit.gates {
        let v = match *gate {
            byzlab::mpc::Gate::Input { player } => {
                let i = next.entry(player).or_insert(0);
                *i += 1;
                inputs[&player][*i - 1] % p
            }
            byzlab::mpc::Gate::Add(a, b) => (wires[a] + wires[b]) % p,
            byzlab::mpc::Gate::Mul(a, b) => (wires[a] * wires[b]) % p,
            byzlab::mpc::Gate::Output { wire, .. } => {
                out.push(wires[wire]);
                0
            }
        };
        wires.push(v);
    }
    out
}

fn mpc_correctness() -> Outcome {
    let started = Instant::now();
    let circuits = [
        (
            "and",
            r#"{"p":5,"n":3,"t":1,"gates":[{"op":"input","player":0},{"op":"input","player":1},
               {"op":"mul","args":[0,1]},{"op":"output","args":[2]}]}"#,
        ),
        (
            "sum",
            r#"{"p":5,"n":3,"t":1,"gates":[{"op":"input","player":0},{"op":"input","player":1},
               {"op":"input","player":2},{"op":"add","args":[0,1]},{"op":"add","args":[3,2]},
               {"op":"output","args":[4]}]}"#,
        ),
        (
            "mul-chain",
            r#"{"p":5,"n":3,"t":1,"gates":[{"op":"input","player":0},{"op":"input","player":1},
               {"op":"input","player":2},{"op":"mul","args":[0,1]},{"op":"mul","args":[3,2]},
               {"op":"output","args":[4]}]}"#,
        ),
    ];
    let mut cases = 0;
    for (name, text) in circuits {
        let c = Circuit::parse(text).map_err(|e| e.to_string())?;
        let owners: Vec<usize> = c.input_gates().into_iter().map(|(_, o)| o).collect();
        let total = 5u64.pow(owners.len() as u32);
        for index in 0..total {
            let mut inputs: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
            let mut rest = index;
            for &owner in &owners {
                inputs.entry(owner).or_default().push(rest % 5);
                rest /= 5;
            }
            let e = evaluate_circuit(&c, &inputs, &mut SeededCoins::new(index)).map_err(|e| e.to_string())?;
            let expected = plain(&c, &inputs);
            for player in 0..3 {
                let got: Vec<u64> = e.outputs[&player].iter().map(|o| o.value.value()).collect();
                if got != expected {
                    return Err(format!("{name}: inputs {inputs:?} gave {got:?}, expected {expected:?}"));
                }
            }
            cases += 1;
        }
    }
    within(Duration::from_secs(10), started)?;
    Ok(format!("{cases} input assignments match plain evaluation"))
}

fn degree_reduction() -> Outcome {
    let started = Instant::now();
    let p = 7;
    let alphas = default_alphas(3, p).map_err(|e| e.to_string())?;
    let c = reduction_matrix(&alphas, 1, p).map_err(|e| e.to_string())?;
    let mut count = 0;
    for c0 in 0..p {
        for c1 in 0..p {
            for c2 in 0..p {
                let g = [Fe::new(c0, p), Fe::new(c1, p), Fe::new(c2, p)];
                let a: Vec<Fe> = alphas.iter().map(|&x| eval_poly(&g, x)).collect();
                let expected: Vec<Fe> = alphas.iter().map(|&x| eval_poly(&g[..2], x)).collect();
                if c.apply(&a) != expected {
                    return Err(format!("g = {c0} + {c1}x + {c2}x^2"));
                }
                count += 1;
            }
        }
    }
    within(Duration::from_secs(5), started)?;
    Ok(format!("{count} polynomials, b = aC matches truncation"))
}

fn privacy_bound() -> Outcome {
    let started = Instant::now();
    let sum = |p: u64| {
        Circuit::parse(&format!(
            r#"{{"p":{p},"n":3,"t":1,"gates":[{{"op":"input","player":0}},{{"op":"input","player":1}},
               {{"op":"input","player":2}},{{"op":"add","args":[0,1]}},{{"op":"add","args":[3,2]}},
               {{"op":"output","args":[4]}}]}}"#
        ))
        .expect("valid circuit")
    };
    // Reference point at the smallest field that admits three distinct
    // nonzero evaluation points.
    let reference = match privacy_audit(&sum(5), &BTreeSet::from([0]), DEFAULT_CAP) {
        Ok(r) => format!("GF(5) reference audit pass={} over {} runs", r.pass, r.runs),
        Err(e) => format!("GF(5) reference audit error: {e}"),
    };
    let report = privacy_audit(&sum(3), &BTreeSet::from([0]), DEFAULT_CAP)
        .map_err(|e| format!("GF(3) audit not runnable: {e}; {reference}"))?;
    within(Duration::from_secs(60), started)?;
    if report.pass {
        Ok(format!("{} runs, views identical given output; {reference}", report.runs))
    } else {
        Err(format!("leak witness {:?}", report.witness))
    }
}

fn determinism() -> Outcome {
    let s = Scenario::from_json(
        r#"{"n":4,"protocol":"om","bound":1,"instigator":0,"decision":1,
            "allowed_faults":["corrupt","drop","spurious"],
            "faults":[{"from":3,"to":1,"kind":"corrupt"},{"from":3,"to":2,"kind":"spurious"},
                      {"from":2,"to":0,"kind":"drop"}],"seed":42}"#,
    )
    .map_err(|e| e.to_string())?;
    let first = run_report(&s, true).map_err(|e| e.to_string())?.to_json();
    for i in 1..100 {
        let again = run_report(&s, true).map_err(|e| e.to_string())?.to_json();
        if again != first {
            return Err(format!("run {i} differs"));
        }
    }
    Ok(format!("100 reports byte-identical ({} bytes)", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 OM(1) bound at n=4", om_bound),
        ("2 impossibility witness at n=3", impossibility_witness),
        ("3 one-round theorem, n<=5", one_round),
        ("4 M(k,n) theorem", mkn_theorem),
        ("5 retreat lemma", retreat_lemma),
        ("6 MPC correctness over GF(5)", mpc_correctness),
        ("7 degree reduction over GF(7)", degree_reduction),
        ("8 privacy bound, sum circuit, n=3, p=3", privacy_bound),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
