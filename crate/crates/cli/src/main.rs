//! `byzlab` command-line front end.
//!
//! Reports go to standard output as JSON. Exit codes: 0 pass, 1 property
//! violated, 2 input error, 3 search space too large, 4 threshold error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use byzlab::model::{build_scenario, AgentId, FaultClass, Scenario, ScenarioConfig};
use byzlab::mpc::{evaluate_circuit, privacy_audit, Circuit, MpcError, SeededCoins};
use byzlab::report::run_report;
use byzlab::verifier::{
    bound_oracle, exhaustive_search, search_all_traitor_sets, Feasibility, SearchReport, Verdict, VerifyError,
    DEFAULT_CAP,
};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

const PASS: u8 = 0;
const VIOLATED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const TOO_LARGE: u8 = 3;
const THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "byzlab", version, about = "Byzantine agreement under device faults, and Shamir-based MPC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and judge it.
    Run {
        file: PathBuf,
        /// Include the full transcript in the report.
        #[arg(long)]
        transcript: bool,
        /// Print a human-readable summary on standard error.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Enumerate every fault strategy on the traitors' channels.
    Search {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Where to write a counterexample; defaults next to the template.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, short)]
        verbose: bool,
    },
    /// Evaluate an arithmetic circuit on secret-shared inputs.
    Mpc {
        circuit: PathBuf,
        /// Inputs as player=value, repeated for players with several input gates.
        #[arg(long, num_args = 1.., value_parser = parse_input)]
        inputs: Vec<(usize, u64)>,
        /// Coalition to audit, as comma-separated player indices.
        #[arg(long, value_delimiter = ',')]
        audit: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Expected feasibility of agreement for a fault model.
    Bounds {
        n: usize,
        bound: u32,
        /// `all` or a comma-separated list of corrupt, drop, spurious.
        classes: String,
    },
}

fn parse_input(s: &str) -> Result<(usize, u64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected player=value, got `{s}`"))?;
    let player = k.trim().parse().map_err(|e| format!("bad player `{k}`: {e}"))?;
    let value = v.trim().parse().map_err(|e| format!("bad value `{v}`: {e}"))?;
    Ok((player, value))
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("BYZ_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| format!("BYZ_SEED must be an unsigned integer: {e}")),
        Err(_) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn scenario_from_value(value: Value) -> Result<Scenario, String> {
    let mut config: ScenarioConfig = serde_json::from_value(value).map_err(|e| format!("malformed scenario: {e}"))?;
    if let Some(seed) = env_seed()? {
        config.seed = seed;
    }
    build_scenario(config).map_err(|e| e.to_string())
}

fn parse_json(text: &str) -> Result<Value, String> {
    serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("byzlab: {message}");
    ExitCode::from(code)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable report"));
}

fn cmd_run(file: &Path, transcript: bool, verbose: bool) -> ExitCode {
    let scenario = match read(file).and_then(|t| parse_json(&t)).and_then(scenario_from_value) {
        Ok(s) => s,
        Err(e) => return fail(INPUT_ERROR, e),
    };
    let report = match run_report(&scenario, transcript) {
        Ok(r) => r,
        Err(e) => return fail(INPUT_ERROR, e),
    };
    println!("{}", report.to_json());
    if verbose {
        let v = &report.verdict;
        eprintln!(
            "ic1={} ic2={} rounds_used={} horizon={} horizon_respected={}",
            v.ic1, v.ic2, v.rounds_used, v.horizon, v.horizon_respected
        );
        for d in &report.decisions {
            let tag = if d.reliable { "" } else { " (traitor)" };
            eprintln!("  agent {}: {} in round {}{tag}", d.agent, d.decision, d.round);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn search_template(text: &str) -> Result<(Scenario, Option<BTreeSet<AgentId>>), String> {
    let mut value = parse_json(text)?;
    let traitors = match value.as_object_mut().and_then(|o| o.remove("traitors")) {
        None => None,
        Some(t) => {
            let list: Vec<usize> = serde_json::from_value(t).map_err(|e| format!("malformed traitors: {e}"))?;
            Some(list.into_iter().map(AgentId).collect())
        }
    };
    Ok((scenario_from_value(value)?, traitors))
}

#[derive(Serialize)]
struct SearchSummary {
    all_pass: bool,
    scenarios_checked: u64,
    /// Decimal string; the count can exceed 64 bits.
    space_size: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<Verdict>,
}

#[derive(Serialize)]
struct BoundsReport {
    n: usize,
    bound: u32,
    classes: BTreeSet<FaultClass>,
    #[serde(flatten)]
    feasibility: Feasibility,
    summary: String,
}

fn default_out(file: &Path) -> PathBuf {
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("template");
    file.with_file_name(format!("{stem}.counterexample.json"))
}

fn cmd_search(file: &Path, cap: u64, out: Option<PathBuf>, verbose: bool) -> ExitCode {
    let (template, traitors) = match read(file).and_then(|t| search_template(&t)) {
        Ok(x) => x,
        Err(e) => return fail(INPUT_ERROR, e),
    };
    let result: Result<SearchReport, VerifyError> = match &traitors {
        Some(t) => exhaustive_search(&template, t, cap),
        None => search_all_traitor_sets(&template, cap),
    };
    let report = match result {
        Ok(r) => r,
        Err(VerifyError::SearchSpaceTooLarge { size, cap }) => {
            print_json(&json!({ "error": "search_space_too_large", "space_size": size.to_string(), "cap": cap }));
            return fail(TOO_LARGE, format!("strategy space of {size} assignments exceeds the cap of {cap}"));
        }
        Err(e) => return fail(INPUT_ERROR, e),
    };
    let mut summary = SearchSummary {
        all_pass: report.all_pass,
        scenarios_checked: report.scenarios_checked,
        space_size: report.space_size.to_string(),
        counterexample: None,
        verdict: None,
    };
    let Some(cx) = report.worst else {
        print_json(&summary);
        if verbose {
            eprintln!("no violation in {} assignments", report.scenarios_checked);
        }
        return ExitCode::from(PASS);
    };
    let path = out.unwrap_or_else(|| default_out(file));
    if let Err(e) = fs::write(&path, cx.scenario.to_json()) {
        return fail(INPUT_ERROR, format!("cannot write {}: {e}", path.display()));
    }
    summary.counterexample = Some(path.display().to_string());
    summary.verdict = Some(cx.verdict);
    print_json(&summary);
    if verbose {
        let channels: Vec<String> = cx.scenario.faults.iter().map(|f| format!("{} {}", f.channel, f.class)).collect();
        eprintln!("violation with faults [{}], written to {}", channels.join(", "), path.display());
    }
    ExitCode::from(VIOLATED)
}

fn mpc_code(e: &MpcError) -> u8 {
    match e {
        MpcError::ThresholdTooHigh { .. } => THRESHOLD,
        MpcError::SearchSpaceTooLarge { .. } => TOO_LARGE,
        _ => INPUT_ERROR,
    }
}

fn cmd_mpc(circuit: &Path, inputs: &[(usize, u64)], audit: Option<Vec<usize>>, seed: Option<u64>, cap: u64) -> ExitCode {
    let circuit = match read(circuit).and_then(|t| Circuit::parse(&t).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => return fail(INPUT_ERROR, e),
    };
    let seed = match env_seed() {
        Ok(env) => seed.or(env).unwrap_or(0),
        Err(e) => return fail(INPUT_ERROR, e),
    };
    let mut by_player: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for &(player, value) in inputs {
        by_player.entry(player).or_default().push(value);
    }
    let evaluation = match evaluate_circuit(&circuit, &by_player, &mut SeededCoins::new(seed)) {
        Ok(e) => e,
        Err(e) => return fail(mpc_code(&e), e),
    };
    let outputs: BTreeMap<String, Vec<u64>> = evaluation
        .outputs
        .iter()
        .map(|(player, values)| (player.to_string(), values.iter().map(|o| o.value.value()).collect()))
        .collect();
    let mut report = json!({ "outputs": outputs });
    let mut code = PASS;
    if let Some(coalition) = audit {
        let coalition: BTreeSet<usize> = coalition.into_iter().collect();
        match privacy_audit(&circuit, &coalition, cap) {
            Ok(a) => {
                if !a.pass {
                    code = VIOLATED;
                }
                report["audit"] = serde_json::to_value(&a).expect("audit serializes");
            }
            Err(e) => {
                print_json(&report);
                return fail(mpc_code(&e), e);
            }
        }
    }
    print_json(&report);
    ExitCode::from(code)
}

fn parse_classes(s: &str) -> Result<BTreeSet<FaultClass>, String> {
    if s.trim() == "all" {
        return Ok(FaultClass::ALL.into_iter().collect());
    }
    s.split([',', '+'])
        .map(|part| {
            let part = part.trim();
            FaultClass::ALL
                .into_iter()
                .find(|c| c.name() == part)
                .ok_or_else(|| format!("unknown fault class `{part}`"))
        })
        .collect()
}

fn cmd_bounds(n: usize, bound: u32, classes: &str) -> ExitCode {
    let classes = match parse_classes(classes) {
        Ok(c) => c,
        Err(e) => return fail(INPUT_ERROR, e),
    };
    let feasibility = bound_oracle(n, bound, &classes);
    print_json(&BoundsReport {
        n,
        bound,
        classes,
        summary: feasibility.summary(),
        feasibility,
    });
    ExitCode::from(PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            transcript,
            verbose,
        } => cmd_run(&file, transcript, verbose),
        Command::Search { file, cap, out, verbose } => cmd_search(&file, cap, out, verbose),
        Command::Mpc {
            circuit,
            inputs,
            audit,
            seed,
            cap,
        } => cmd_mpc(&circuit, &inputs, audit, seed, cap),
        Command::Bounds { n, bound, classes } => cmd_bounds(n, bound, &classes),
    }
}
