//! Interactive-consistency verdicts, the bound oracle, and exhaustive
//! adversary search.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::engine::{DecisionRecord, EngineError, Transcript};
use crate::model::{
    AgentId, Channel, CorruptionStrategy, FaultClass, FaultSpec, ProtocolKind, Scenario, SymbolMap,
};
use crate::protocols::{simulate, simulate_decisions};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    /// All reliable agents decided identically.
    pub ic1: bool,
    /// A reliable instigator's decision was adopted by every reliable agent
    /// (vacuously true when the instigator is a traitor).
    pub ic2: bool,
    pub rounds_used: u32,
    pub horizon: u32,
    pub horizon_respected: bool,
}

impl Verdict {
    pub fn passes(&self) -> bool {
        self.ic1 && self.ic2 && self.horizon_respected
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("transcript has no decision for agent {0}")]
    IncompleteTranscript(AgentId),
    #[error("search space has {size} assignments, above the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u64 },
    #[error("traitor {agent} is outside [0, {n})")]
    InvalidTraitor { agent: AgentId, n: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub fn check_verdict(transcript: &Transcript, scenario: &Scenario) -> Result<Verdict, VerifyError> {
    let mut traitor: SmallVec<[bool; 16]> = smallvec![false; scenario.n];
    for f in &scenario.faults {
        traitor[f.channel.from.0] = true;
    }
    let mut reliable: SmallVec<[&DecisionRecord; 16]> = SmallVec::new();
    for agent in scenario.agents() {
        let record = transcript
            .decision_of(agent)
            .ok_or(VerifyError::IncompleteTranscript(agent))?;
        if !traitor[agent.0] {
            reliable.push(record);
        }
    }
    let ic1 = reliable.windows(2).all(|w| w[0].decision == w[1].decision);
    let ic2 = traitor[scenario.instigator.0] || reliable.iter().all(|d| d.decision == scenario.decision);
    let rounds_used = reliable.iter().map(|d| d.round).max().unwrap_or(0);
    let horizon = scenario.horizon();
    Ok(Verdict {
        ic1,
        ic2,
        rounds_used,
        horizon,
        horizon_respected: rounds_used <= horizon && transcript.rounds.len() as u32 <= horizon,
    })
}

/// Simulate and judge one scenario.
pub fn judge(scenario: &Scenario) -> Result<(Transcript, Verdict), VerifyError> {
    let transcript = simulate(scenario)?;
    let verdict = check_verdict(&transcript, scenario)?;
    Ok((transcript, verdict))
}

/// `judge` without per-event records; the verdict is identical.
pub fn judge_decisions(scenario: &Scenario) -> Result<(Transcript, Verdict), VerifyError> {
    let transcript = simulate_decisions(scenario)?;
    let verdict = check_verdict(&transcript, scenario)?;
    Ok((transcript, verdict))
}

/// Expected feasibility of agreement for a fault model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub horizon: Option<u32>,
    /// Smallest agent count that makes the configuration feasible, when a
    /// lower bound applies.
    pub min_agents: Option<usize>,
}

impl Feasibility {
    pub fn summary(&self) -> String {
        match (self.feasible, self.horizon, self.min_agents) {
            (true, Some(h), _) => format!("feasible, horizon {h}"),
            (false, _, Some(min)) => format!("infeasible (needs {min})"),
            _ => "infeasible".to_string(),
        }
    }
}

/// Results table: spurious faults together with corruption or loss make
/// agreement as hard as the Byzantine generals problem (n ≥ 3·bound+1,
/// bound+1 rounds); corrupt-only needs one round; corrupt+drop needs
/// bound+1 rounds for any n. Spurious faults alone cannot disturb oral
/// messages, which never leave a channel silent, so they fall in the
/// bound+1 row for any n.
pub fn bound_oracle(n: usize, bound: u32, classes: &BTreeSet<FaultClass>) -> Feasibility {
    let spurious = classes.contains(&FaultClass::Spurious);
    if spurious && classes.len() > 1 {
        let min = 3 * bound as usize + 1;
        Feasibility {
            feasible: n >= min,
            horizon: (n >= min).then_some(bound + 1),
            min_agents: Some(min),
        }
    } else if spurious || classes.contains(&FaultClass::Drop) {
        Feasibility {
            feasible: true,
            horizon: Some(bound + 1),
            min_agents: None,
        }
    } else {
        Feasibility {
            feasible: true,
            horizon: Some(1),
            min_agents: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub scenario: Scenario,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub scenarios_checked: u64,
    pub space_size: u128,
    /// First violating assignment in enumeration order.
    pub worst: Option<Counterexample>,
    pub all_pass: bool,
}

/// Every fault assignment on the channels of a fixed traitor set.
pub struct StrategySpace {
    template: Scenario,
    channels: Vec<Channel>,
    options: Vec<Option<FaultSpec>>,
}

impl StrategySpace {
    pub fn new(template: &Scenario, traitors: &BTreeSet<AgentId>) -> Result<StrategySpace, VerifyError> {
        if let Some(&agent) = traitors.iter().find(|a| a.0 >= template.n) {
            return Err(VerifyError::InvalidTraitor { agent, n: template.n });
        }
        let channels: Vec<Channel> = traitors
            .iter()
            .flat_map(|t| (0..template.n).filter(move |&j| j != t.0).map(move |j| Channel::new(t.0, j)))
            .collect();
        let alphabet = template.protocol.alphabet();
        let horizon = template.horizon() as usize;
        // Options are shared by every channel; the channel is filled in on decode.
        let mut options: Vec<Option<FaultSpec>> = vec![None];
        let placeholder = Channel::new(0, 0);
        for &class in &template.allowed {
            let maps = SymbolMap::all_for_class(class, alphabet);
            for choice in product_indices(maps.len(), horizon) {
                let rounds = choice.into_iter().map(|i| maps[i].clone()).collect();
                options.push(Some(FaultSpec {
                    channel: placeholder,
                    class,
                    strategy: CorruptionStrategy::new(rounds),
                }));
            }
        }
        Ok(StrategySpace {
            template: template.with_faults(Vec::new()),
            channels,
            options,
        })
    }

    pub fn size(&self) -> u128 {
        let base = self.options.len() as u128;
        self.channels
            .iter()
            .try_fold(1u128, |acc, _| acc.checked_mul(base))
            .unwrap_or(u128::MAX)
    }

    pub fn options_per_channel(&self) -> usize {
        self.options.len()
    }

    /// Assignment with mixed-radix index `index` (first channel most significant).
    pub fn scenario(&self, index: u64) -> Scenario {
        let base = self.options.len() as u64;
        let mut faults = Vec::with_capacity(self.channels.len());
        let mut rest = index;
        for &channel in self.channels.iter().rev() {
            let digit = (rest % base) as usize;
            rest /= base;
            if let Some(spec) = &self.options[digit] {
                faults.push(FaultSpec {
                    channel,
                    ..spec.clone()
                });
            }
        }
        faults.reverse();
        self.template.with_faults(faults)
    }

    fn scenario_from_digits(&self, digits: &[usize]) -> Scenario {
        let faults = self
            .channels
            .iter()
            .zip(digits)
            .filter_map(|(&channel, &d)| {
                self.options[d].as_ref().map(|spec| FaultSpec {
                    channel,
                    ..spec.clone()
                })
            })
            .collect();
        self.template.with_faults(faults)
    }

    fn random_scenario(&self, rng: &mut ChaCha8Rng) -> Scenario {
        let digits: Vec<usize> = (0..self.channels.len())
            .map(|_| rng.gen_range(0..self.options.len()))
            .collect();
        self.scenario_from_digits(&digits)
    }
}

fn product_indices(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..base).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

fn violation(scenario: &Scenario) -> Option<Result<Verdict, VerifyError>> {
    match judge_decisions(scenario) {
        Ok((_, verdict)) if verdict.passes() => None,
        Ok((_, verdict)) => Some(Ok(verdict)),
        Err(e) => Some(Err(e)),
    }
}

/// Enumerate every fault assignment on the traitors' channels within the
/// template's allowed classes. Faults already on the template are ignored.
pub fn exhaustive_search(
    template: &Scenario,
    traitors: &BTreeSet<AgentId>,
    cap: u64,
) -> Result<SearchReport, VerifyError> {
    let space = StrategySpace::new(template, traitors)?;
    let size = space.size();
    if size > cap as u128 {
        return Err(VerifyError::SearchSpaceTooLarge { size, cap });
    }
    search_space(&space)
}

fn search_space(space: &StrategySpace) -> Result<SearchReport, VerifyError> {
    let size = space.size() as u64;
    let found = (0..size)
        .into_par_iter()
        .map(|i| (i, space.scenario(i)))
        .filter_map(|(i, s)| violation(&s).map(|v| (i, s, v)))
        .find_first(|_| true);
    match found {
        None => Ok(SearchReport {
            scenarios_checked: size,
            space_size: size as u128,
            worst: None,
            all_pass: true,
        }),
        Some((i, scenario, verdict)) => Ok(SearchReport {
            scenarios_checked: i + 1,
            space_size: size as u128,
            worst: Some(Counterexample {
                scenario,
                verdict: verdict?,
            }),
            all_pass: false,
        }),
    }
}

/// Largest number of traitors the protocol is claimed to tolerate.
pub fn tolerance(scenario: &Scenario) -> usize {
    match scenario.protocol {
        ProtocolKind::Om | ProtocolKind::Mkn => (scenario.bound as usize).min(scenario.n),
        ProtocolKind::OneRoundMm => scenario.n,
    }
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn traitor_sets(n: usize, size: usize) -> Vec<BTreeSet<AgentId>> {
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<AgentId>>) {
        if left == 0 {
            out.push(cur.iter().map(|&i| AgentId(i)).collect());
            return;
        }
        for i in start..=n.saturating_sub(left) {
            cur.push(i);
            go(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        go(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Search every traitor set of maximal tolerated size. Smaller traitor sets
/// are covered because a traitor's channels may all be left fault-free.
pub fn search_all_traitor_sets(template: &Scenario, cap: u64) -> Result<SearchReport, VerifyError> {
    let sets = traitor_sets(template.n, tolerance(template));
    let spaces = sets
        .iter()
        .map(|set| StrategySpace::new(template, set))
        .collect::<Result<Vec<_>, _>>()?;
    let total = spaces
        .iter()
        .try_fold(0u128, |acc, s| acc.checked_add(s.size()))
        .unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(VerifyError::SearchSpaceTooLarge { size: total, cap });
    }
    let mut checked = 0u64;
    for space in &spaces {
        let report = search_space(space)?;
        checked += report.scenarios_checked;
        if !report.all_pass {
            return Ok(SearchReport {
                scenarios_checked: checked,
                space_size: total,
                ..report
            });
        }
    }
    Ok(SearchReport {
        scenarios_checked: checked,
        space_size: total,
        worst: None,
        all_pass: true,
    })
}

/// Seeded random sampling of a strategy space too large to enumerate.
pub fn sampled_search(
    template: &Scenario,
    traitors: &BTreeSet<AgentId>,
    samples: u64,
    seed: u64,
) -> Result<SearchReport, VerifyError> {
    let space = StrategySpace::new(template, traitors)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let scenario = space.random_scenario(&mut rng);
        if let Some(verdict) = violation(&scenario) {
            return Ok(SearchReport {
                scenarios_checked: i + 1,
                space_size: space.size(),
                worst: Some(Counterexample {
                    scenario,
                    verdict: verdict?,
                }),
                all_pass: false,
            });
        }
    }
    Ok(SearchReport {
        scenarios_checked: samples,
        space_size: space.size(),
        worst: None,
        all_pass: true,
    })
}
