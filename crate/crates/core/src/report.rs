//! Machine-readable run reports.

use serde::Serialize;

use crate::engine::Transcript;
use crate::model::{classify_agents, AgentId, Decision, Scenario, ScenarioConfig};
use crate::verifier::{judge, Verdict, VerifyError};

#[derive(Clone, Debug, Serialize)]
pub struct AgentDecision {
    pub agent: AgentId,
    pub decision: Decision,
    pub round: u32,
    pub reliable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub verdict: Verdict,
    pub decisions: Vec<AgentDecision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Transcript>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.passes() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run_report(scenario: &Scenario, with_transcript: bool) -> Result<RunReport, VerifyError> {
    let (transcript, verdict) = judge(scenario)?;
    let partition = classify_agents(scenario);
    let decisions = transcript
        .decisions
        .iter()
        .map(|d| AgentDecision {
            agent: d.agent,
            decision: d.decision,
            round: d.round,
            reliable: partition.reliable.contains(&d.agent),
        })
        .collect();
    Ok(RunReport {
        scenario: scenario.to_config(),
        verdict,
        decisions,
        transcript: with_transcript.then_some(transcript),
    })
}
