//! Synchronous round engine.
//!
//! Each round has three phases: every agent emits its outbox, every packet
//! passes through the device of its channel, and every agent receives the
//! packets delivered to it (possibly deciding). The engine, not the state
//! machines, enforces the protocol's round horizon.

use serde::Serialize;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::model::{AgentId, Channel, Decision, FaultClass, FaultSpec, Scenario, Slot, Symbol};

/// A protocol message. `path` is the chain of senders the message claims:
/// the relay path for oral messages, the lineage for M(k, n).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Message {
    pub symbol: Symbol,
    pub path: Path,
}

/// Short sender chains stay inline.
pub type Path = SmallVec<[AgentId; 4]>;

impl Message {
    pub fn new(symbol: Symbol, path: impl Into<Path>) -> Message {
        Message {
            symbol,
            path: path.into(),
        }
    }

    /// A message whose path is just its sender.
    pub fn from_sender(symbol: Symbol, sender: AgentId) -> Message {
        Message {
            symbol,
            path: smallvec![sender],
        }
    }
}

/// A delivered message together with the physical channel it arrived on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub from: AgentId,
    pub message: Message,
}

/// Per-agent state machine.
pub trait AgentMachine: Send {
    /// Messages this agent sends in `round`.
    fn outbox(&mut self, round: u32) -> Vec<(AgentId, Message)>;

    /// Process the messages delivered in `round`. Returns a decision the
    /// first time the agent decides; never afterwards.
    fn receive(&mut self, round: u32, inbox: &[Envelope]) -> Option<Decision>;
}

/// A protocol instance bound to one scenario.
pub trait Protocol: Sync {
    fn horizon(&self) -> u32;

    fn default_decision(&self) -> Decision;

    fn machines(&self) -> Vec<Box<dyn AgentMachine>>;

    /// Packet a spurious device on `channel` fabricates in `round`.
    fn forge(&self, channel: Channel, round: u32, symbol: Symbol) -> Vec<Message>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    pub channel: Channel,
    pub attempted: Vec<Message>,
    pub delivered: Vec<Message>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault_applied: Option<FaultClass>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub events: Vec<Event>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionRecord {
    pub agent: AgentId,
    pub decision: Decision,
    pub round: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
    /// At most one entry per agent, sorted by agent.
    pub decisions: Vec<DecisionRecord>,
}

impl Transcript {
    pub fn decision_of(&self, agent: AgentId) -> Option<&DecisionRecord> {
        self.decisions
            .binary_search_by(|d| d.agent.cmp(&agent))
            .ok()
            .map(|i| &self.decisions[i])
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("agent {agent} emitted messages in round {round}, past the horizon {horizon}")]
    HorizonExceeded { agent: AgentId, round: u32, horizon: u32 },
    #[error("agent {agent} addressed a message to invalid recipient {to}")]
    InvalidRecipient { agent: AgentId, to: AgentId },
    #[error("agent {agent} tried to revise its decision in round {round}")]
    DecisionRevised { agent: AgentId, round: u32 },
}

/// Symbol-level device behaviour.
pub fn apply_fault(spec: Option<&FaultSpec>, round: u32, attempted: Slot) -> Slot {
    match spec {
        None => attempted,
        Some(spec) => spec.strategy.map_for_round(round).get(attempted),
    }
}

/// Packet-level device behaviour: each message is mapped symbol-wise; an
/// empty packet is silence and a spurious device may fill it once per round.
pub fn apply_fault_packet(
    spec: Option<&FaultSpec>,
    round: u32,
    attempted: &[Message],
    forge: impl FnOnce(Symbol) -> Vec<Message>,
) -> Vec<Message> {
    let Some(spec) = spec else {
        return attempted.to_vec();
    };
    if attempted.is_empty() {
        return match apply_fault(Some(spec), round, None) {
            Some(symbol) => forge(symbol),
            None => Vec::new(),
        };
    }
    attempted
        .iter()
        .filter_map(|m| {
            apply_fault(Some(spec), round, Some(m.symbol)).map(|symbol| Message {
                symbol,
                path: m.path.clone(),
            })
        })
        .collect()
}

/// Result of one synchronous round.
pub struct RoundOutcome {
    pub record: RoundRecord,
    /// Delivered packets per receiver, ordered by sender.
    pub inboxes: Vec<Vec<Envelope>>,
    pub decisions: Vec<(AgentId, Decision)>,
}

/// Fault lookup by channel, indexed as `from * n + to`.
pub struct FaultTable<'a> {
    n: usize,
    slots: SmallVec<[Option<&'a FaultSpec>; 64]>,
}

impl<'a> FaultTable<'a> {
    pub fn new(n: usize, faults: impl IntoIterator<Item = &'a FaultSpec>) -> FaultTable<'a> {
        let mut slots = smallvec![None; n * n];
        for f in faults {
            slots[f.channel.from.0 * n + f.channel.to.0] = Some(f);
        }
        FaultTable { n, slots }
    }

    pub fn get(&self, channel: Channel) -> Option<&'a FaultSpec> {
        self.slots[channel.from.0 * self.n + channel.to.0]
    }
}

/// Run a single round: send, apply faults, deliver.
pub fn run_round(
    protocol: &dyn Protocol,
    machines: &mut [Box<dyn AgentMachine>],
    round: u32,
    faults: &FaultTable<'_>,
) -> Result<RoundOutcome, EngineError> {
    let n = machines.len();
    let mut attempted = collect_outboxes(machines, round)?;
    let mut events = Vec::new();
    let mut inboxes: Vec<Vec<Envelope>> = vec![Vec::new(); n];
    // Every channel is visited so that spurious devices on idle channels fire.
    for from in 0..n {
        for to in (0..n).filter(|&to| to != from) {
            let channel = Channel::new(from, to);
            let sent = std::mem::take(&mut attempted[from * n + to]);
            let spec = faults.get(channel);
            let delivered = apply_fault_packet(spec, round, &sent, |symbol| protocol.forge(channel, round, symbol));
            if sent.is_empty() && delivered.is_empty() {
                continue;
            }
            let fault_applied = spec.filter(|_| sent != delivered).map(|s| s.class);
            inboxes[to].extend(delivered.iter().map(|m| Envelope {
                from: AgentId(from),
                message: m.clone(),
            }));
            events.push(Event {
                channel,
                attempted: sent,
                delivered,
                fault_applied,
            });
        }
    }

    let mut decisions = Vec::with_capacity(n);
    for (agent, machine) in machines.iter_mut().enumerate() {
        if let Some(decision) = machine.receive(round, &inboxes[agent]) {
            decisions.push((AgentId(agent), decision));
        }
    }

    Ok(RoundOutcome {
        record: RoundRecord { round, events },
        inboxes,
        decisions,
    })
}

/// Outboxes of every agent, bucketed by channel as `from * n + to`.
fn collect_outboxes(machines: &mut [Box<dyn AgentMachine>], round: u32) -> Result<Vec<Vec<Message>>, EngineError> {
    let n = machines.len();
    let mut attempted: Vec<Vec<Message>> = vec![Vec::new(); n * n];
    for (sender, machine) in machines.iter_mut().enumerate() {
        for (to, message) in machine.outbox(round) {
            if to.0 >= n || to.0 == sender {
                return Err(EngineError::InvalidRecipient {
                    agent: AgentId(sender),
                    to,
                });
            }
            attempted[sender * n + to.0].push(message);
        }
    }
    Ok(attempted)
}

/// A round that keeps no records. Inboxes are filled receiver by receiver
/// into one buffer; the delivered content is the same as in `run_round`.
fn quiet_round(
    protocol: &dyn Protocol,
    machines: &mut [Box<dyn AgentMachine>],
    round: u32,
    faults: &FaultTable<'_>,
    decisions: &mut Vec<(AgentId, Decision)>,
) -> Result<(), EngineError> {
    let n = machines.len();
    let mut sent: Vec<(usize, usize, Message)> = Vec::new();
    for (sender, machine) in machines.iter_mut().enumerate() {
        for (to, message) in machine.outbox(round) {
            if to.0 >= n || to.0 == sender {
                return Err(EngineError::InvalidRecipient {
                    agent: AgentId(sender),
                    to,
                });
            }
            sent.push((to.0, sender, message));
        }
    }
    sent.sort_by_key(|&(to, from, _)| (to, from));
    let mut pending = sent.into_iter().peekable();
    let mut buffer: Vec<Envelope> = Vec::with_capacity(pending.len() + n);
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(0);
    for to in 0..n {
        for from in (0..n).filter(|&from| from != to) {
            let channel = Channel::new(from, to);
            let spec = faults.get(channel);
            let map = spec.map(|s| s.strategy.map_for_round(round));
            let mut silent = true;
            while let Some((_, _, message)) = pending.next_if(|&(t, f, _)| (t, f) == (to, from)) {
                silent = false;
                let symbol = match map {
                    None => Some(message.symbol),
                    Some(map) => map.get(Some(message.symbol)),
                };
                if let Some(symbol) = symbol {
                    buffer.push(Envelope {
                        from: AgentId(from),
                        message: Message { symbol, ..message },
                    });
                }
            }
            if let (true, Some(Some(symbol))) = (silent, map.map(|m| m.get(None))) {
                buffer.extend(protocol.forge(channel, round, symbol).into_iter().map(|message| Envelope {
                    from: AgentId(from),
                    message,
                }));
            }
        }
        bounds.push(buffer.len());
    }
    for (agent, machine) in machines.iter_mut().enumerate() {
        if let Some(decision) = machine.receive(round, &buffer[bounds[agent]..bounds[agent + 1]]) {
            decisions.push((AgentId(agent), decision));
        }
    }
    Ok(())
}

/// Run the scenario's protocol to its horizon and settle undecided agents
/// with the protocol's default.
pub fn run_protocol(scenario: &Scenario, protocol: &dyn Protocol) -> Result<Transcript, EngineError> {
    protocol_impl(scenario, protocol, true)
}

/// Same run as `run_protocol`, but round records carry no events. Used
/// where only decisions matter.
pub fn run_decisions(scenario: &Scenario, protocol: &dyn Protocol) -> Result<Transcript, EngineError> {
    protocol_impl(scenario, protocol, false)
}

fn protocol_impl(scenario: &Scenario, protocol: &dyn Protocol, record: bool) -> Result<Transcript, EngineError> {
    let horizon = protocol.horizon();
    let faults = FaultTable::new(scenario.n, &scenario.faults);
    let mut machines = protocol.machines();
    let mut decided: Vec<Option<DecisionRecord>> = vec![None; machines.len()];
    let mut transcript = Transcript::default();
    transcript.rounds.reserve(horizon as usize);

    let mut decisions = Vec::with_capacity(machines.len());
    for round in 1..=horizon {
        decisions.clear();
        let record = if record {
            let outcome = run_round(protocol, &mut machines, round, &faults)?;
            decisions = outcome.decisions;
            outcome.record
        } else {
            quiet_round(protocol, &mut machines, round, &faults, &mut decisions)?;
            RoundRecord {
                round,
                events: Vec::new(),
            }
        };
        for &(agent, decision) in &decisions {
            if decided[agent.0].is_some() {
                return Err(EngineError::DecisionRevised { agent, round });
            }
            decided[agent.0] = Some(DecisionRecord { agent, decision, round });
        }
        transcript.rounds.push(record);
    }

    for (agent, machine) in machines.iter_mut().enumerate() {
        if !machine.outbox(horizon + 1).is_empty() {
            return Err(EngineError::HorizonExceeded {
                agent: AgentId(agent),
                round: horizon + 1,
                horizon,
            });
        }
    }

    let default = protocol.default_decision();
    transcript.decisions = decided
        .into_iter()
        .enumerate()
        .map(|(agent, record)| {
            record.unwrap_or(DecisionRecord {
                agent: AgentId(agent),
                decision: default,
                round: horizon,
            })
        })
        .collect();
    Ok(transcript)
}
