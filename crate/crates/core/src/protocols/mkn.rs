//! Recursive M(k, n) for the corrupt+drop fault model.
//!
//! Attack is a single message, retreat is silence. An undecided agent that
//! receives anything decides Attack and, in the following round, acts as
//! commander of M(k-1, n-1): it sends to every agent outside the sender-set
//! of the message that triggered its decision. Decided agents ignore all
//! traffic; agents still undecided after round k+1 retreat.
//!
//! The lineage travels inside the message. A corrupted (garbled) message
//! is still "a message", but its lineage is unreadable, so the receiver
//! only knows the physical sender.

use smallvec::smallvec;

use super::path_is_well_formed;
use crate::engine::{AgentMachine, Envelope, Message, Path, Protocol};
use crate::model::{AgentId, Channel, Decision, Symbol};

pub struct Mkn {
    k: u32,
    n: usize,
    instigator: AgentId,
    decision: Decision,
}

impl Mkn {
    pub fn new(k: u32, n: usize, instigator: AgentId, decision: Decision) -> Mkn {
        Mkn {
            k,
            n,
            instigator,
            decision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MknState {
    pub decided: Option<(Decision, u32)>,
    /// Round in which this agent acts as commander of the sub-protocol.
    pub acting_commander_round: Option<u32>,
    /// Lineage this agent forwards: trigger's sender-set plus itself.
    pub lineage: Path,
}

struct MknAgent {
    id: AgentId,
    n: usize,
    k: u32,
    instigator: AgentId,
    decision: Decision,
    state: MknState,
}

impl MknAgent {
    fn lineage_of(&self, env: &Envelope) -> Path {
        let path = &env.message.path;
        if env.message.symbol == Symbol::Attack && path_is_well_formed(path, env.from, self.id) {
            path.clone()
        } else {
            smallvec![env.from]
        }
    }
}

impl AgentMachine for MknAgent {
    fn outbox(&mut self, round: u32) -> Vec<(AgentId, Message)> {
        if self.state.acting_commander_round != Some(round) || round > self.k + 1 {
            return Vec::new();
        }
        let excluded = &self.state.lineage;
        (0..self.n)
            .map(AgentId)
            .filter(|j| !excluded.contains(j))
            .map(|j| (j, Message::new(Symbol::Attack, self.state.lineage.clone())))
            .collect()
    }

    fn receive(&mut self, round: u32, inbox: &[Envelope]) -> Option<Decision> {
        if self.state.decided.is_some() {
            return None;
        }
        let decision = if self.id == self.instigator {
            // Its broadcast, if any, went out in this round's send phase.
            self.state.acting_commander_round = None;
            Some(self.decision)
        } else if let Some(trigger) = inbox.first() {
            let mut lineage = self.lineage_of(trigger);
            lineage.push(self.id);
            self.state.lineage = lineage;
            self.state.acting_commander_round = (round < self.k + 1).then_some(round + 1);
            Some(Decision::Attack)
        } else if round == self.k + 1 {
            Some(Decision::Retreat)
        } else {
            None
        };
        if let Some(d) = decision {
            self.state.decided = Some((d, round));
        }
        decision
    }
}

impl Protocol for Mkn {
    fn horizon(&self) -> u32 {
        self.k + 1
    }

    fn default_decision(&self) -> Decision {
        Decision::Retreat
    }

    fn machines(&self) -> Vec<Box<dyn AgentMachine>> {
        (0..self.n)
            .map(|i| {
                let id = AgentId(i);
                let sends_first = id == self.instigator && self.decision == Decision::Attack;
                Box::new(MknAgent {
                    id,
                    n: self.n,
                    k: self.k,
                    instigator: self.instigator,
                    decision: self.decision,
                    state: MknState {
                        decided: None,
                        acting_commander_round: sends_first.then_some(1),
                        lineage: if sends_first { smallvec![id] } else { Path::new() },
                    },
                }) as Box<dyn AgentMachine>
            })
            .collect()
    }

    fn forge(&self, channel: Channel, _round: u32, symbol: Symbol) -> Vec<Message> {
        vec![Message::from_sender(symbol, channel.from)]
    }
}

#[cfg(test)]
mod tests {
    use crate::model::{AgentId, Decision, Scenario};
    use crate::protocols::simulate;

    fn scenario(n: usize, k: u32, decision: &str, faults: &str) -> Scenario {
        Scenario::from_json(&format!(
            r#"{{"n":{n},"protocol":"mkn","bound":{k},"instigator":0,"decision":"{decision}",
                "allowed_faults":["corrupt","drop"],"faults":[{faults}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn retreat_is_unanimous_at_round_k_plus_one() {
        let s = scenario(
            4,
            2,
            "retreat",
            r#"{"from":0,"to":1,"kind":"drop"},{"from":2,"to":3,"kind":"corrupt"}"#,
        );
        let t = simulate(&s).unwrap();
        assert_eq!(t.rounds.len(), 3);
        assert!(t.rounds.iter().all(|r| r.events.is_empty()));
        for d in &t.decisions {
            assert_eq!(d.decision, Decision::Retreat);
            if d.agent != AgentId(0) {
                assert_eq!(d.round, 3);
            }
        }
    }

    #[test]
    fn reliable_instigator_reaches_everyone_in_round_one() {
        let t = simulate(&scenario(4, 2, "attack", "")).unwrap();
        assert!(t.decisions.iter().all(|d| d.decision == Decision::Attack && d.round == 1));
        // Round-1 receivers relay to everyone outside {0, self}.
        assert_eq!(t.rounds[1].events.len(), 3 * 2);
    }

    #[test]
    fn single_surviving_channel_spreads_the_attack() {
        let s = scenario(
            4,
            3,
            "attack",
            r#"{"from":0,"to":2,"kind":"drop"},{"from":0,"to":3,"kind":"drop"}"#,
        );
        let t = simulate(&s).unwrap();
        let round_of = |a: usize| t.decision_of(AgentId(a)).unwrap().round;
        assert!(t.decisions.iter().all(|d| d.decision == Decision::Attack));
        assert_eq!(round_of(1), 1);
        assert_eq!(round_of(2), 2);
        assert_eq!(round_of(3), 2);
        assert!(t.decisions.iter().all(|d| d.round <= 4));
    }

    #[test]
    fn lineages_grow_by_one_agent_per_hop() {
        let s = scenario(
            4,
            3,
            "attack",
            r#"{"from":0,"to":2,"kind":"drop"},{"from":0,"to":3,"kind":"drop"},
               {"from":1,"to":3,"kind":"drop"}"#,
        );
        let t = simulate(&s).unwrap();
        for record in &t.rounds {
            for e in &record.events {
                for m in &e.delivered {
                    assert_eq!(m.path.len(), record.round as usize);
                }
            }
        }
        assert_eq!(t.decision_of(AgentId(3)).unwrap().round, 3);
    }

    #[test]
    fn garbled_trigger_falls_back_to_the_physical_sender() {
        let s = scenario(
            3,
            2,
            "attack",
            r#"{"from":0,"to":1,"kind":"corrupt"},{"from":0,"to":2,"kind":"drop"}"#,
        );
        let t = simulate(&s).unwrap();
        // Agent 1 got a garbled message from 0, still attacks, and relays to 2 only.
        assert_eq!(t.decision_of(AgentId(1)).unwrap().decision, Decision::Attack);
        let relays: Vec<_> = t.rounds[1].events.iter().map(|e| e.channel.to).collect();
        assert_eq!(relays, vec![AgentId(2)]);
        assert_eq!(t.decision_of(AgentId(2)).unwrap().round, 2);
    }
}
