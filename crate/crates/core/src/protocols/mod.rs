//! The three agreement protocols as engine state machines.

mod mkn;
mod om;
mod one_round;

use std::collections::BTreeSet;

pub use mkn::Mkn;
pub use om::OralMessages;
pub use one_round::OneRound;

use crate::engine::{EngineError, Protocol, Transcript};
use crate::model::{AgentId, ProtocolKind, Scenario};

/// Build the protocol selected by the scenario.
pub fn for_scenario(scenario: &Scenario) -> Box<dyn Protocol> {
    match scenario.protocol {
        ProtocolKind::Om => Box::new(OralMessages::new(
            scenario.bound,
            scenario.n,
            scenario.instigator,
            scenario.decision,
        )),
        ProtocolKind::OneRoundMm => Box::new(OneRound::new(scenario.n, scenario.instigator, scenario.decision)),
        ProtocolKind::Mkn => Box::new(Mkn::new(
            scenario.bound,
            scenario.n,
            scenario.instigator,
            scenario.decision,
        )),
    }
}

/// Run a scenario with the protocol it names.
pub fn simulate(scenario: &Scenario) -> Result<Transcript, EngineError> {
    crate::engine::run_protocol(scenario, for_scenario(scenario).as_ref())
}

/// Run a scenario keeping decisions and round count but no per-event records.
pub fn simulate_decisions(scenario: &Scenario) -> Result<Transcript, EngineError> {
    crate::engine::run_decisions(scenario, for_scenario(scenario).as_ref())
}

/// Senders of a message and of all its causal ancestors, given the lineage
/// (instigator first, direct sender last).
pub fn sender_set(lineage: &[AgentId]) -> BTreeSet<AgentId> {
    lineage.iter().copied().collect()
}

/// Structural checks shared by path-carrying protocols: non-empty, ends at
/// the physical sender, no repeated agent, receiver not already on it.
fn path_is_well_formed(path: &[AgentId], from: AgentId, receiver: AgentId) -> bool {
    path.last() == Some(&from)
        && !path.contains(&receiver)
        && path.iter().enumerate().all(|(i, a)| !path[..i].contains(a))
}
