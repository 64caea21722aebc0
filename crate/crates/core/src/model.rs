//! Agents, messages, device faults and scenarios.
//!
//! A scenario is the complete, validated description of one run: how many
//! agents take part, which agreement protocol they follow, who instigates it
//! and with what decision, and which directed devices are faulty. The
//! on-disk form is a strict JSON object (see [`ScenarioConfig`]); every
//! other module consumes the validated [`Scenario`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer, Visitor};
use smallvec::{smallvec, SmallVec};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Index of an agent in `[0, n)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Final decision of an agent.
///
/// Attack/retreat protocols use `Attack`/`Retreat`; the oral-message
/// protocol decides over the binary value domain `{0, 1}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    Attack,
    Retreat,
    Zero,
    One,
}

impl Decision {
    pub fn is_binary_value(self) -> bool {
        matches!(self, Decision::Zero | Decision::One)
    }

    pub fn from_bit(bit: u8) -> Decision {
        if bit == 0 {
            Decision::Zero
        } else {
            Decision::One
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Attack => f.write_str("attack"),
            Decision::Retreat => f.write_str("retreat"),
            Decision::Zero => f.write_str("0"),
            Decision::One => f.write_str("1"),
        }
    }
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Decision::Attack => serializer.serialize_str("attack"),
            Decision::Retreat => serializer.serialize_str("retreat"),
            Decision::Zero => serializer.serialize_u64(0),
            Decision::One => serializer.serialize_u64(1),
        }
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct DecisionVisitor;

        impl Visitor<'_> for DecisionVisitor {
            type Value = Decision;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"attack\", \"retreat\", 0 or 1")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Decision, E> {
                match v {
                    "attack" => Ok(Decision::Attack),
                    "retreat" => Ok(Decision::Retreat),
                    other => Err(E::unknown_variant(other, &["attack", "retreat"])),
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Decision, E> {
                match v {
                    0 => Ok(Decision::Zero),
                    1 => Ok(Decision::One),
                    _ => Err(E::invalid_value(de::Unexpected::Unsigned(v), &self)),
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Decision, E> {
                match v {
                    0 => Ok(Decision::Zero),
                    1 => Ok(Decision::One),
                    _ => Err(E::invalid_value(de::Unexpected::Signed(v), &self)),
                }
            }
        }

        deserializer.deserialize_any(DecisionVisitor)
    }
}

/// A message symbol on the wire. Silence is represented as `None` wherever a
/// [`Slot`] is used.
///
/// `Garbled` is what a corrupting device turns an `Attack` into: the
/// receiver still sees *some* message but cannot read its contents.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Zero,
    One,
    Attack,
    Garbled,
}

impl Symbol {
    pub fn name(self) -> &'static str {
        match self {
            Symbol::Zero => "0",
            Symbol::One => "1",
            Symbol::Attack => "attack",
            Symbol::Garbled => "garbled",
        }
    }

    fn parse(name: &str) -> Option<Symbol> {
        match name {
            "0" => Some(Symbol::Zero),
            "1" => Some(Symbol::One),
            "attack" => Some(Symbol::Attack),
            "garbled" => Some(Symbol::Garbled),
            _ => None,
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// A message symbol or silence.
pub type Slot = Option<Symbol>;

fn slot_name(slot: Slot) -> &'static str {
    slot.map_or("silence", Symbol::name)
}

fn parse_slot(name: &str) -> Option<Slot> {
    if name == "silence" {
        Some(None)
    } else {
        Symbol::parse(name).map(Some)
    }
}

pub const BINARY_ALPHABET: &[Symbol] = &[Symbol::Zero, Symbol::One];
pub const ATTACK_ALPHABET: &[Symbol] = &[Symbol::Attack, Symbol::Garbled];

/// Kind of device fault.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultClass {
    /// m/m′: a sent message is delivered as a different message.
    Corrupt,
    /// m/φ: a sent message is lost.
    Drop,
    /// φ/m′: a message is delivered although nothing was sent.
    Spurious,
}

impl FaultClass {
    pub const ALL: [FaultClass; 3] = [FaultClass::Corrupt, FaultClass::Drop, FaultClass::Spurious];

    pub fn name(self) -> &'static str {
        match self {
            FaultClass::Corrupt => "corrupt",
            FaultClass::Drop => "drop",
            FaultClass::Spurious => "spurious",
        }
    }
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A directed device: the sender's interface toward one receiver.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Channel {
    pub from: AgentId,
    pub to: AgentId,
}

impl Channel {
    pub fn new(from: usize, to: usize) -> Channel {
        Channel {
            from: AgentId(from),
            to: AgentId(to),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// A total map over `alphabet ∪ {silence}` for one round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolMap {
    /// Indexed by `slot_index`; `None` marks a slot outside the alphabet.
    entries: [Option<Slot>; SLOTS],
}

const SLOTS: usize = 5;

fn slot_index(slot: Slot) -> usize {
    match slot {
        None => 0,
        Some(Symbol::Zero) => 1,
        Some(Symbol::One) => 2,
        Some(Symbol::Attack) => 3,
        Some(Symbol::Garbled) => 4,
    }
}

const SLOT_ORDER: [Slot; SLOTS] = [
    None,
    Some(Symbol::Zero),
    Some(Symbol::One),
    Some(Symbol::Attack),
    Some(Symbol::Garbled),
];

impl SymbolMap {
    pub fn identity(alphabet: &[Symbol]) -> SymbolMap {
        let mut map = SymbolMap { entries: [None; SLOTS] };
        map.set(None, None);
        for &s in alphabet {
            map.set(Some(s), Some(s));
        }
        map
    }

    pub(crate) fn set(&mut self, from: Slot, to: Slot) {
        self.entries[slot_index(from)] = Some(to);
    }

    /// The canonical map of a class when no explicit strategy is given.
    /// `spurious` is the symbol a spurious device fabricates.
    pub fn class_default(class: FaultClass, alphabet: &[Symbol], spurious: Symbol) -> SymbolMap {
        let mut map = SymbolMap::identity(alphabet);
        match class {
            FaultClass::Corrupt => {
                for (i, &s) in alphabet.iter().enumerate() {
                    let next = alphabet[(i + 1) % alphabet.len()];
                    map.set(Some(s), Some(next));
                }
            }
            FaultClass::Drop => {
                for &s in alphabet {
                    map.set(Some(s), None);
                }
            }
            FaultClass::Spurious => {
                map.set(None, Some(spurious));
            }
        }
        map
    }

    /// Every map on `alphabet` that is consistent with `class`.
    pub fn all_for_class(class: FaultClass, alphabet: &[Symbol]) -> Vec<SymbolMap> {
        match class {
            FaultClass::Drop => vec![SymbolMap::class_default(class, alphabet, alphabet[0])],
            FaultClass::Spurious => alphabet
                .iter()
                .map(|&s| SymbolMap::class_default(class, alphabet, s))
                .collect(),
            FaultClass::Corrupt => {
                let mut maps = vec![SymbolMap::identity(alphabet)];
                for &from in alphabet {
                    let mut next = Vec::new();
                    for map in &maps {
                        for &to in alphabet.iter().filter(|&&to| to != from) {
                            let mut m = *map;
                            m.set(Some(from), Some(to));
                            next.push(m);
                        }
                    }
                    maps = next;
                }
                maps
            }
        }
    }

    pub fn get(&self, slot: Slot) -> Slot {
        self.entries[slot_index(slot)].unwrap_or(slot)
    }

    /// Defined entries in slot order: silence first, then symbols.
    pub fn entries(&self) -> impl Iterator<Item = (Slot, Slot)> + '_ {
        SLOT_ORDER
            .iter()
            .zip(&self.entries)
            .filter_map(|(&from, &to)| to.map(|to| (from, to)))
    }

    /// Whether this map is a legal instance of `class`.
    pub fn obeys(&self, class: FaultClass) -> bool {
        self.entries().all(|(from, to)| match (class, from) {
            (FaultClass::Corrupt, Some(s)) => to.is_some() && to != Some(s),
            (FaultClass::Corrupt, None) => to.is_none(),
            (FaultClass::Drop, Some(_)) => to.is_none(),
            (FaultClass::Drop, None) => to.is_none(),
            (FaultClass::Spurious, Some(s)) => to == Some(s),
            (FaultClass::Spurious, None) => to.is_some(),
        })
    }
}

/// Per-round maps applied by one faulty device. Round `r` uses entry
/// `r - 1`; rounds past the end reuse the last entry.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorruptionStrategy {
    rounds: SmallVec<[SymbolMap; 3]>,
}

impl Clone for CorruptionStrategy {
    fn clone(&self) -> CorruptionStrategy {
        CorruptionStrategy {
            rounds: SmallVec::from_slice(&self.rounds),
        }
    }
}

impl CorruptionStrategy {
    pub fn new(rounds: Vec<SymbolMap>) -> CorruptionStrategy {
        assert!(!rounds.is_empty(), "strategy needs at least one round map");
        CorruptionStrategy { rounds: rounds.into() }
    }

    pub fn persistent(map: SymbolMap) -> CorruptionStrategy {
        CorruptionStrategy { rounds: smallvec![map] }
    }

    pub fn map_for_round(&self, round: u32) -> &SymbolMap {
        let idx = (round.max(1) as usize - 1).min(self.rounds.len() - 1);
        &self.rounds[idx]
    }

    pub fn rounds(&self) -> &[SymbolMap] {
        &self.rounds
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaultSpec {
    pub channel: Channel,
    pub class: FaultClass,
    pub strategy: CorruptionStrategy,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProtocolKind {
    /// Oral messages OM(m).
    #[serde(rename = "om")]
    Om,
    /// One-round protocol for the corrupt-only model.
    #[serde(rename = "one_round_mm")]
    OneRoundMm,
    /// Recursive M(k, n) for the corrupt+drop model.
    #[serde(rename = "mkn")]
    Mkn,
}

impl ProtocolKind {
    /// Fault classes under which the protocol is defined.
    pub fn supported_classes(self) -> &'static [FaultClass] {
        match self {
            ProtocolKind::Om => &FaultClass::ALL,
            ProtocolKind::OneRoundMm => &[FaultClass::Corrupt],
            ProtocolKind::Mkn => &[FaultClass::Corrupt, FaultClass::Drop],
        }
    }

    pub fn alphabet(self) -> &'static [Symbol] {
        match self {
            ProtocolKind::Om => BINARY_ALPHABET,
            ProtocolKind::OneRoundMm | ProtocolKind::Mkn => ATTACK_ALPHABET,
        }
    }

    /// Number of synchronous rounds the engine runs.
    pub fn horizon(self, bound: u32) -> u32 {
        match self {
            ProtocolKind::Om | ProtocolKind::Mkn => bound + 1,
            ProtocolKind::OneRoundMm => 1,
        }
    }

    /// Value an undecided agent settles on at the horizon.
    pub fn default_decision(self) -> Decision {
        match self {
            ProtocolKind::Om => Decision::Zero,
            ProtocolKind::OneRoundMm | ProtocolKind::Mkn => Decision::Retreat,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("malformed scenario file: {0}")]
    Parse(String),
    #[error("invalid channel {from}->{to}: agents must be distinct and below n={n}")]
    InvalidChannel { from: i64, to: i64, n: usize },
    #[error("fault class {class} on channel {channel} is not allowed ({reason})")]
    ClassNotAllowed {
        class: FaultClass,
        channel: String,
        reason: &'static str,
    },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("invalid strategy on channel {channel}: {reason}")]
    InvalidStrategy { channel: String, reason: String },
}

/// Validated description of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub n: usize,
    pub protocol: ProtocolKind,
    /// m for OM(m), k for M(k, n); unused by the one-round protocol.
    pub bound: u32,
    pub instigator: AgentId,
    pub decision: Decision,
    pub allowed: BTreeSet<FaultClass>,
    /// Sorted by channel; at most one fault per channel.
    pub faults: Vec<FaultSpec>,
    pub seed: u64,
}

impl Scenario {
    pub fn horizon(&self) -> u32 {
        self.protocol.horizon(self.bound)
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n).map(AgentId)
    }

    pub fn fault_on(&self, channel: Channel) -> Option<&FaultSpec> {
        self.faults
            .binary_search_by(|f| f.channel.cmp(&channel))
            .ok()
            .map(|i| &self.faults[i])
    }

    /// Same scenario with a different fault list. The faults are assumed to
    /// have been produced against this scenario's alphabet and classes.
    pub fn with_faults(&self, mut faults: Vec<FaultSpec>) -> Scenario {
        faults.sort_by(|a, b| a.channel.cmp(&b.channel));
        Scenario {
            faults,
            ..self.clone()
        }
    }

    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            n: self.n as i64,
            protocol: self.protocol,
            bound: self.bound as i64,
            instigator: self.instigator.0 as i64,
            decision: self.decision,
            allowed_faults: self.allowed.iter().copied().collect(),
            faults: self
                .faults
                .iter()
                .map(|f| FaultConfig {
                    from: f.channel.from.0 as i64,
                    to: f.channel.to.0 as i64,
                    kind: f.class,
                    strategy: StrategyConfig {
                        rounds: f
                            .strategy
                            .rounds()
                            .iter()
                            .map(|m| {
                                m.entries()
                                    .map(|(k, v)| (slot_name(k).to_string(), slot_name(v).to_string()))
                                    .collect()
                            })
                            .collect(),
                    },
                })
                .collect(),
            seed: self.seed,
        }
    }

    /// Canonical file form: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_config()).expect("scenario serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        build_scenario(ScenarioConfig::parse(text)?)
    }
}

/// On-disk scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: i64,
    pub protocol: ProtocolKind,
    pub bound: i64,
    pub instigator: i64,
    pub decision: Decision,
    #[serde(default)]
    pub allowed_faults: Vec<FaultClass>,
    #[serde(default)]
    pub faults: Vec<FaultConfig>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    pub from: i64,
    pub to: i64,
    pub kind: FaultClass,
    #[serde(default)]
    pub strategy: StrategyConfig,
}

/// `{"rounds": [{"<slot>": "<slot>", ...}, ...]}` where a slot is `"0"`,
/// `"1"`, `"attack"`, `"garbled"` or `"silence"`. Missing keys take the
/// class default; an empty `rounds` list means the class default for every
/// round.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    #[serde(default)]
    pub rounds: Vec<BTreeMap<String, String>>,
}

fn index_in_range(value: i64, n: usize) -> Option<usize> {
    usize::try_from(value).ok().filter(|&v| v < n)
}

/// Validate a parsed scenario file.
pub fn build_scenario(config: ScenarioConfig) -> Result<Scenario, ScenarioError> {
    if config.n < 2 {
        return Err(ScenarioError::BadParameter(format!("n must be at least 2, got {}", config.n)));
    }
    let n = config.n as usize;
    let bound = u32::try_from(config.bound)
        .map_err(|_| ScenarioError::BadParameter(format!("bound must be non-negative, got {}", config.bound)))?;
    let instigator = index_in_range(config.instigator, n).ok_or_else(|| {
        ScenarioError::BadParameter(format!("instigator {} outside [0, {n})", config.instigator))
    })?;
    let protocol = config.protocol;
    match (protocol, config.decision.is_binary_value()) {
        (ProtocolKind::Om, false) => {
            return Err(ScenarioError::BadParameter(
                "the om protocol decides over {0, 1}; decision must be 0 or 1".into(),
            ))
        }
        (ProtocolKind::OneRoundMm | ProtocolKind::Mkn, true) => {
            return Err(ScenarioError::BadParameter(
                "attack/retreat protocols need decision \"attack\" or \"retreat\"".into(),
            ))
        }
        _ => {}
    }

    let allowed: BTreeSet<FaultClass> = config.allowed_faults.iter().copied().collect();
    let alphabet = protocol.alphabet();
    let mut coins = ChaCha8Rng::seed_from_u64(config.seed);
    let mut faults: Vec<FaultSpec> = Vec::with_capacity(config.faults.len());

    for fault in &config.faults {
        let (from, to) = match (index_in_range(fault.from, n), index_in_range(fault.to, n)) {
            (Some(from), Some(to)) if from != to => (from, to),
            _ => {
                return Err(ScenarioError::InvalidChannel {
                    from: fault.from,
                    to: fault.to,
                    n,
                })
            }
        };
        let channel = Channel::new(from, to);
        if !allowed.contains(&fault.kind) {
            return Err(ScenarioError::ClassNotAllowed {
                class: fault.kind,
                channel: channel.to_string(),
                reason: "not listed in allowed_faults",
            });
        }
        if !protocol.supported_classes().contains(&fault.kind) {
            return Err(ScenarioError::ClassNotAllowed {
                class: fault.kind,
                channel: channel.to_string(),
                reason: "outside the fault model of the chosen protocol",
            });
        }
        if faults.iter().any(|f| f.channel == channel) {
            return Err(ScenarioError::BadParameter(format!("more than one fault on channel {channel}")));
        }
        let strategy = build_strategy(channel, fault.kind, &fault.strategy, alphabet, &mut coins)?;
        faults.push(FaultSpec {
            channel,
            class: fault.kind,
            strategy,
        });
    }
    // Allowed classes outside the protocol's model are rejected even when no
    // fault uses them, so that searches over the template stay in-model.
    if let Some(&class) = allowed.iter().find(|c| !protocol.supported_classes().contains(c)) {
        return Err(ScenarioError::ClassNotAllowed {
            class,
            channel: "*".into(),
            reason: "outside the fault model of the chosen protocol",
        });
    }
    faults.sort_by(|a, b| a.channel.cmp(&b.channel));

    Ok(Scenario {
        n,
        protocol,
        bound,
        instigator: AgentId(instigator),
        decision: config.decision,
        allowed,
        faults,
        seed: config.seed,
    })
}

fn build_strategy(
    channel: Channel,
    class: FaultClass,
    config: &StrategyConfig,
    alphabet: &[Symbol],
    coins: &mut ChaCha8Rng,
) -> Result<CorruptionStrategy, ScenarioError> {
    let invalid = |reason: String| ScenarioError::InvalidStrategy {
        channel: channel.to_string(),
        reason,
    };
    // Only spurious devices have a free choice in their default map.
    let spurious = alphabet[coins.gen_range(0..alphabet.len())];
    if config.rounds.is_empty() {
        return Ok(CorruptionStrategy::persistent(SymbolMap::class_default(
            class, alphabet, spurious,
        )));
    }
    let mut rounds = Vec::with_capacity(config.rounds.len());
    for raw in &config.rounds {
        let mut map = SymbolMap::class_default(class, alphabet, spurious);
        for (key, value) in raw {
            let from = parse_slot(key).ok_or_else(|| invalid(format!("unknown slot {key:?}")))?;
            let to = parse_slot(value).ok_or_else(|| invalid(format!("unknown slot {value:?}")))?;
            for slot in [from, to].into_iter().flatten() {
                if !alphabet.contains(&slot) {
                    return Err(invalid(format!("symbol {} is not in the protocol alphabet", slot.name())));
                }
            }
            map.set(from, to);
        }
        if !map.obeys(class) {
            return Err(invalid(format!("map is not a legal {class} fault")));
        }
        rounds.push(map);
    }
    Ok(CorruptionStrategy::new(rounds))
}

/// Reliable agents and traitors (agents owning at least one faulty device).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub reliable: BTreeSet<AgentId>,
    pub traitors: BTreeSet<AgentId>,
}

pub fn classify_agents(scenario: &Scenario) -> Partition {
    let traitors: BTreeSet<AgentId> = scenario.faults.iter().map(|f| f.channel.from).collect();
    let reliable = scenario.agents().filter(|a| !traitors.contains(a)).collect();
    Partition { reliable, traitors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: i64, protocol: ProtocolKind, decision: Decision) -> ScenarioConfig {
        ScenarioConfig {
            n,
            protocol,
            bound: 1,
            instigator: 0,
            decision,
            allowed_faults: FaultClass::ALL.to_vec(),
            faults: vec![],
            seed: 7,
        }
    }

    fn fault(from: i64, to: i64, kind: FaultClass) -> FaultConfig {
        FaultConfig {
            from,
            to,
            kind,
            strategy: StrategyConfig::default(),
        }
    }

    #[test]
    fn builds_om_scenario_with_one_corrupt_fault() {
        let mut c = config(4, ProtocolKind::Om, Decision::One);
        c.faults.push(fault(1, 2, FaultClass::Corrupt));
        let s = build_scenario(c).unwrap();
        assert_eq!(s.n, 4);
        assert_eq!(s.faults.len(), 1);
        let map = s.faults[0].strategy.map_for_round(1);
        assert_eq!(map.get(Some(Symbol::Zero)), Some(Symbol::One));
        assert_eq!(map.get(Some(Symbol::One)), Some(Symbol::Zero));
        assert_eq!(map.get(None), None);
    }

    #[test]
    fn out_of_range_channel_is_rejected() {
        let mut c = config(3, ProtocolKind::Om, Decision::One);
        c.faults.push(fault(0, 5, FaultClass::Corrupt));
        assert!(matches!(build_scenario(c), Err(ScenarioError::InvalidChannel { .. })));

        let mut c = config(3, ProtocolKind::Om, Decision::One);
        c.faults.push(fault(1, 1, FaultClass::Drop));
        assert!(matches!(build_scenario(c), Err(ScenarioError::InvalidChannel { .. })));
    }

    #[test]
    fn class_outside_allowed_set_is_rejected() {
        let mut c = config(4, ProtocolKind::Om, Decision::One);
        c.allowed_faults = vec![FaultClass::Corrupt];
        c.faults.push(fault(1, 2, FaultClass::Spurious));
        assert!(matches!(build_scenario(c), Err(ScenarioError::ClassNotAllowed { .. })));
    }

    #[test]
    fn spurious_is_outside_the_attack_protocols_model() {
        let mut c = config(4, ProtocolKind::Mkn, Decision::Attack);
        c.allowed_faults = vec![FaultClass::Corrupt, FaultClass::Drop, FaultClass::Spurious];
        assert!(matches!(build_scenario(c), Err(ScenarioError::ClassNotAllowed { .. })));

        let mut c = config(4, ProtocolKind::OneRoundMm, Decision::Attack);
        c.allowed_faults = vec![FaultClass::Drop];
        assert!(matches!(build_scenario(c), Err(ScenarioError::ClassNotAllowed { .. })));
    }

    #[test]
    fn negative_parameters_are_rejected() {
        let c = config(-1, ProtocolKind::Om, Decision::One);
        assert!(matches!(build_scenario(c), Err(ScenarioError::BadParameter(_))));
        let mut c = config(4, ProtocolKind::Om, Decision::One);
        c.bound = -2;
        assert!(matches!(build_scenario(c), Err(ScenarioError::BadParameter(_))));
    }

    #[test]
    fn decision_domain_must_match_protocol() {
        let c = config(4, ProtocolKind::Om, Decision::Attack);
        assert!(matches!(build_scenario(c), Err(ScenarioError::BadParameter(_))));
        let c = config(4, ProtocolKind::Mkn, Decision::One);
        assert!(matches!(build_scenario(c), Err(ScenarioError::BadParameter(_))));
    }

    #[test]
    fn unknown_keys_are_a_parse_error() {
        let text = r#"{"n":3,"protocol":"om","bound":1,"instigator":0,"decision":1,"colour":"red"}"#;
        assert!(matches!(Scenario::from_json(text), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn explicit_strategy_must_obey_class() {
        let mut c = config(4, ProtocolKind::Om, Decision::One);
        let mut f = fault(1, 2, FaultClass::Corrupt);
        f.strategy.rounds.push(BTreeMap::from([("0".to_string(), "0".to_string())]));
        c.faults.push(f);
        assert!(matches!(build_scenario(c), Err(ScenarioError::InvalidStrategy { .. })));
    }

    #[test]
    fn per_round_strategy_reuses_last_map() {
        let mut c = config(4, ProtocolKind::Om, Decision::One);
        let mut f = fault(3, 0, FaultClass::Spurious);
        f.strategy.rounds = vec![
            BTreeMap::from([("silence".to_string(), "0".to_string())]),
            BTreeMap::from([("silence".to_string(), "1".to_string())]),
        ];
        c.faults.push(f);
        let s = build_scenario(c).unwrap();
        let st = &s.faults[0].strategy;
        assert_eq!(st.map_for_round(1).get(None), Some(Symbol::Zero));
        assert_eq!(st.map_for_round(2).get(None), Some(Symbol::One));
        assert_eq!(st.map_for_round(5).get(None), Some(Symbol::One));
    }

    #[test]
    fn corrupt_maps_enumerate_derangements() {
        assert_eq!(SymbolMap::all_for_class(FaultClass::Corrupt, BINARY_ALPHABET).len(), 1);
        assert_eq!(SymbolMap::all_for_class(FaultClass::Spurious, BINARY_ALPHABET).len(), 2);
        assert_eq!(SymbolMap::all_for_class(FaultClass::Drop, ATTACK_ALPHABET).len(), 1);
        for class in FaultClass::ALL {
            for map in SymbolMap::all_for_class(class, BINARY_ALPHABET) {
                assert!(map.obeys(class));
            }
        }
    }

    #[test]
    fn classify_without_faults_is_all_reliable() {
        let s = build_scenario(config(5, ProtocolKind::Om, Decision::Zero)).unwrap();
        let p = classify_agents(&s);
        assert_eq!(p.reliable.len(), 5);
        assert!(p.traitors.is_empty());
    }

    #[test]
    fn classify_marks_fault_senders_as_traitors() {
        let mut c = config(4, ProtocolKind::Om, Decision::One);
        c.faults = vec![fault(2, 0, FaultClass::Drop), fault(2, 1, FaultClass::Corrupt)];
        let p = classify_agents(&build_scenario(c).unwrap());
        assert_eq!(p.traitors, BTreeSet::from([AgentId(2)]));

        let mut c = config(4, ProtocolKind::Om, Decision::One);
        c.faults = vec![fault(0, 1, FaultClass::Drop), fault(3, 1, FaultClass::Corrupt)];
        let p = classify_agents(&build_scenario(c).unwrap());
        assert_eq!(p.traitors, BTreeSet::from([AgentId(0), AgentId(3)]));
        assert_eq!(p.reliable, BTreeSet::from([AgentId(1), AgentId(2)]));
    }
}
