//! One-round protocol for the corrupt-only fault model.
//!
//! The commander sends to everyone iff it attacks and stays silent
//! otherwise; every other agent attacks iff anything at all arrives in
//! round 1.

use crate::engine::{AgentMachine, Envelope, Message, Protocol};
use crate::model::{AgentId, Channel, Decision, Symbol};

pub struct OneRound {
    n: usize,
    commander: AgentId,
    decision: Decision,
}

impl OneRound {
    pub fn new(n: usize, commander: AgentId, decision: Decision) -> OneRound {
        OneRound { n, commander, decision }
    }
}

struct OneRoundAgent {
    id: AgentId,
    n: usize,
    commander: AgentId,
    decision: Decision,
}

impl AgentMachine for OneRoundAgent {
    fn outbox(&mut self, round: u32) -> Vec<(AgentId, Message)> {
        if round != 1 || self.id != self.commander || self.decision != Decision::Attack {
            return Vec::new();
        }
        (0..self.n)
            .map(AgentId)
            .filter(|&j| j != self.id)
            .map(|j| (j, Message::from_sender(Symbol::Attack, self.id)))
            .collect()
    }

    fn receive(&mut self, round: u32, inbox: &[Envelope]) -> Option<Decision> {
        if round != 1 {
            return None;
        }
        Some(if self.id == self.commander {
            self.decision
        } else if inbox.is_empty() {
            Decision::Retreat
        } else {
            Decision::Attack
        })
    }
}

impl Protocol for OneRound {
    fn horizon(&self) -> u32 {
        1
    }

    fn default_decision(&self) -> Decision {
        Decision::Retreat
    }

    fn machines(&self) -> Vec<Box<dyn AgentMachine>> {
        (0..self.n)
            .map(|i| {
                Box::new(OneRoundAgent {
                    id: AgentId(i),
                    n: self.n,
                    commander: self.commander,
                    decision: self.decision,
                }) as Box<dyn AgentMachine>
            })
            .collect()
    }

    fn forge(&self, channel: Channel, _round: u32, symbol: Symbol) -> Vec<Message> {
        vec![Message::from_sender(symbol, channel.from)]
    }
}
