//! Oral messages OM(m).
//!
//! The recursion is unrolled into an exponential information-gathering
//! tree: in round `r` every lieutenant relays, for each path of length
//! `r - 1` it could have heard, the value it holds for that path (0 if
//! nothing arrived). After round `m + 1` each lieutenant resolves the tree
//! bottom-up by majority, which is exactly the value OM(m) assigns.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::path_is_well_formed;
use crate::engine::{AgentMachine, Envelope, Message, Path, Protocol};
use crate::model::{AgentId, Channel, Decision, Symbol};

const DEFAULT_VALUE: u8 = 0;

#[derive(Debug)]
struct Params {
    m: u32,
    n: usize,
    commander: AgentId,
}

impl Params {
    /// Every path of `len` distinct agents that starts at the commander and
    /// avoids `excluded`.
    fn paths(&self, len: usize, excluded: &[AgentId]) -> Vec<Vec<AgentId>> {
        if len == 0 || excluded.contains(&self.commander) {
            return Vec::new();
        }
        let mut paths = vec![vec![self.commander]];
        for _ in 1..len {
            let mut next = Vec::new();
            for path in &paths {
                for j in (0..self.n).map(AgentId) {
                    if !path.contains(&j) && !excluded.contains(&j) {
                        let mut extended = path.clone();
                        extended.push(j);
                        next.push(extended);
                    }
                }
            }
            paths = next;
        }
        paths
    }
}

pub struct OralMessages {
    params: Arc<Params>,
    value: Decision,
}

impl OralMessages {
    pub fn new(m: u32, n: usize, commander: AgentId, value: Decision) -> OralMessages {
        debug_assert!(value.is_binary_value());
        OralMessages {
            params: Arc::new(Params { m, n, commander }),
            value,
        }
    }
}

fn bit_of(symbol: Symbol) -> Option<u8> {
    match symbol {
        Symbol::Zero => Some(0),
        Symbol::One => Some(1),
        _ => None,
    }
}

fn symbol_of(bit: u8) -> Symbol {
    if bit == 0 {
        Symbol::Zero
    } else {
        Symbol::One
    }
}

/// Strict majority of ones, otherwise the default.
fn majority(votes: &[u8]) -> u8 {
    let ones = votes.iter().filter(|&&v| v == 1).count();
    if 2 * ones > votes.len() {
        1
    } else {
        DEFAULT_VALUE
    }
}

struct OmAgent {
    id: AgentId,
    params: Arc<Params>,
    value: u8,
    heard: BTreeMap<Vec<AgentId>, u8>,
}

impl OmAgent {
    fn is_commander(&self) -> bool {
        self.id == self.params.commander
    }

    fn resolve(&self, path: &mut Vec<AgentId>) -> u8 {
        let own = self.heard.get(path.as_slice()).copied().unwrap_or(DEFAULT_VALUE);
        if path.len() == self.params.m as usize + 1 {
            return own;
        }
        let mut votes = vec![own];
        for j in (0..self.params.n).map(AgentId) {
            if j != self.id && !path.contains(&j) {
                path.push(j);
                votes.push(self.resolve(path));
                path.pop();
            }
        }
        majority(&votes)
    }
}

impl AgentMachine for OmAgent {
    fn outbox(&mut self, round: u32) -> Vec<(AgentId, Message)> {
        let p = &self.params;
        if round > p.m + 1 {
            return Vec::new();
        }
        if self.is_commander() {
            if round != 1 {
                return Vec::new();
            }
            let msg = Message::from_sender(symbol_of(self.value), self.id);
            return (0..p.n)
                .map(AgentId)
                .filter(|&j| j != self.id)
                .map(|j| (j, msg.clone()))
                .collect();
        }
        if round < 2 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for path in p.paths(round as usize - 1, &[self.id]) {
            let value = self.heard.get(&path).copied().unwrap_or(DEFAULT_VALUE);
            let mut relayed = path.clone();
            relayed.push(self.id);
            let relayed = Path::from_vec(relayed);
            for j in (0..p.n).map(AgentId).filter(|j| !relayed.contains(j)) {
                out.push((j, Message::new(symbol_of(value), relayed.clone())));
            }
        }
        out
    }

    fn receive(&mut self, round: u32, inbox: &[Envelope]) -> Option<Decision> {
        if self.is_commander() {
            return (round == 1).then(|| Decision::from_bit(self.value));
        }
        for env in inbox {
            let path = &env.message.path;
            let Some(bit) = bit_of(env.message.symbol) else {
                continue;
            };
            if path.len() == round as usize
                && path.first() == Some(&self.params.commander)
                && path_is_well_formed(path, env.from, self.id)
            {
                self.heard.entry(path.to_vec()).or_insert(bit);
            }
        }
        if round == self.params.m + 1 {
            let mut root = vec![self.params.commander];
            Some(Decision::from_bit(self.resolve(&mut root)))
        } else {
            None
        }
    }
}

impl Protocol for OralMessages {
    fn horizon(&self) -> u32 {
        self.params.m + 1
    }

    fn default_decision(&self) -> Decision {
        Decision::Zero
    }

    fn machines(&self) -> Vec<Box<dyn AgentMachine>> {
        let value = u8::from(self.value == Decision::One);
        (0..self.params.n)
            .map(|i| {
                Box::new(OmAgent {
                    id: AgentId(i),
                    params: Arc::clone(&self.params),
                    value,
                    heard: BTreeMap::new(),
                }) as Box<dyn AgentMachine>
            })
            .collect()
    }

    /// A forged packet carries every path the sender would legitimately
    /// relay to the receiver in this round, all with the forged value.
    fn forge(&self, channel: Channel, round: u32, symbol: Symbol) -> Vec<Message> {
        let p = &self.params;
        let paths: Vec<Vec<AgentId>> = if channel.from == p.commander {
            if round == 1 {
                vec![vec![p.commander]]
            } else {
                Vec::new()
            }
        } else if round >= 2 {
            p.paths(round as usize - 1, &[channel.from, channel.to])
                .into_iter()
                .map(|mut path| {
                    path.push(channel.from);
                    path
                })
                .collect()
        } else {
            Vec::new()
        };
        if paths.is_empty() {
            return vec![Message::from_sender(symbol, channel.from)];
        }
        paths.into_iter().map(|path| Message::new(symbol, path)).collect()
    }
}
