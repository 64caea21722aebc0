use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::field::{check_prime, Coins, Fe};
use super::session::{Session, ViewEntry};
use super::shamir::{add_shares, ShareVector};
use super::MpcError;

/// A gate; its output wire has the gate's index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    Input { player: usize },
    Add(usize, usize),
    Mul(usize, usize),
    /// Open `wire` to one player, or to everyone when `player` is `None`.
    Output { wire: usize, player: Option<usize> },
}

/// Straight-line arithmetic circuit over GF(p) for `n` players with
/// sharing threshold `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub modulus: u64,
    pub n: usize,
    pub threshold: usize,
    pub gates: Vec<Gate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub p: u64,
    pub n: usize,
    pub t: usize,
    pub gates: Vec<GateFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFile {
    pub op: String,
    #[serde(default)]
    pub args: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
}

impl Circuit {
    pub fn parse(text: &str) -> Result<Circuit, MpcError> {
        let file: CircuitFile = serde_json::from_str(text).map_err(|e| MpcError::InvalidCircuit(e.to_string()))?;
        Circuit::from_file(&file)
    }

    pub fn from_file(file: &CircuitFile) -> Result<Circuit, MpcError> {
        let bad = |i: usize, msg: &str| MpcError::InvalidCircuit(format!("gate {i}: {msg}"));
        let mut gates = Vec::with_capacity(file.gates.len());
        for (i, g) in file.gates.iter().enumerate() {
            let gate = match (g.op.as_str(), g.args.as_slice()) {
                ("input", []) => Gate::Input {
                    player: g.player.ok_or_else(|| bad(i, "input gate needs a player"))?,
                },
                ("add", &[x, y]) => Gate::Add(x, y),
                ("mul", &[x, y]) => Gate::Mul(x, y),
                ("output", &[wire]) => Gate::Output { wire, player: g.player },
                ("input" | "add" | "mul" | "output", _) => return Err(bad(i, "wrong number of args")),
                (op, _) => return Err(bad(i, &format!("unknown op {op:?}"))),
            };
            gates.push(gate);
        }
        let circuit = Circuit {
            modulus: file.p,
            n: file.n,
            threshold: file.t,
            gates,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn to_file(&self) -> CircuitFile {
        let gate = |op: &str, args: Vec<usize>, player: Option<usize>| GateFile {
            op: op.to_string(),
            args,
            player,
        };
        CircuitFile {
            p: self.modulus,
            n: self.n,
            t: self.threshold,
            gates: self
                .gates
                .iter()
                .map(|g| match *g {
                    Gate::Input { player } => gate("input", vec![], Some(player)),
                    Gate::Add(x, y) => gate("add", vec![x, y], None),
                    Gate::Mul(x, y) => gate("mul", vec![x, y], None),
                    Gate::Output { wire, player } => gate("output", vec![wire], player),
                })
                .collect(),
        }
    }

    /// Structural checks: arguments refer to earlier non-output gates and
    /// players are in range.
    pub fn validate(&self) -> Result<(), MpcError> {
        check_prime(self.modulus)?;
        if self.n == 0 {
            return Err(MpcError::InvalidCircuit("n must be positive".into()));
        }
        for (i, gate) in self.gates.iter().enumerate() {
            let wire_ok = |w: usize| w < i && !matches!(self.gates[w], Gate::Output { .. });
            let ok = match *gate {
                Gate::Input { player } => player < self.n,
                Gate::Add(x, y) | Gate::Mul(x, y) => wire_ok(x) && wire_ok(y),
                Gate::Output { wire, player } => wire_ok(wire) && player.map_or(true, |p| p < self.n),
            };
            if !ok {
                return Err(MpcError::InvalidCircuit(format!(
                    "gate {i} references a later gate, an output gate, or an unknown player"
                )));
            }
        }
        Ok(())
    }

    /// Input gates in order, with their owners.
    pub fn input_gates(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| match *g {
                Gate::Input { player } => Some((i, player)),
                _ => None,
            })
            .collect()
    }

    /// Privacy bound for curious players: floor((n - 1) / 2).
    pub fn max_private_threshold(&self) -> usize {
        (self.n - 1) / 2
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutputValue {
    pub gate: usize,
    pub value: Fe,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Values opened to each player, in gate order.
    pub outputs: BTreeMap<usize, Vec<OutputValue>>,
    /// Everything each player saw.
    pub views: Vec<Vec<ViewEntry>>,
}

/// Evaluate `circuit` on shared inputs. `inputs[player]` lists that
/// player's values in the order of its input gates.
pub fn evaluate_circuit(
    circuit: &Circuit,
    inputs: &BTreeMap<usize, Vec<u64>>,
    coins: &mut dyn Coins,
) -> Result<Evaluation, MpcError> {
    circuit.validate()?;
    if circuit.threshold > circuit.max_private_threshold() {
        return Err(MpcError::ThresholdTooHigh {
            t: circuit.threshold,
            n: circuit.n,
        });
    }
    let p = circuit.modulus;
    let mut session = Session::new(p, circuit.n, circuit.threshold)?;
    let mut consumed: BTreeMap<usize, usize> = BTreeMap::new();
    let mut wires: Vec<Option<ShareVector>> = Vec::with_capacity(circuit.gates.len());
    let mut outputs: BTreeMap<usize, Vec<OutputValue>> = BTreeMap::new();

    for (index, gate) in circuit.gates.iter().enumerate() {
        let wire = |w: usize| wires[w].as_ref().expect("validated wire");
        let produced = match *gate {
            Gate::Input { player } => {
                let slot = consumed.entry(player).or_insert(0);
                let raw = *inputs
                    .get(&player)
                    .and_then(|values| values.get(*slot))
                    .ok_or(MpcError::MissingInput(player))?;
                *slot += 1;
                if raw >= p {
                    return Err(MpcError::ValueOutOfField { value: raw, p });
                }
                let value = Fe::new(raw, p);
                session.record_input(player, value);
                Some(session.deal(player, value, coins)?)
            }
            Gate::Add(x, y) => Some(add_shares(wire(x), wire(y))?),
            Gate::Mul(x, y) => {
                let (a, b) = (wire(x).clone(), wire(y).clone());
                Some(session.multiply(&a, &b, coins)?)
            }
            Gate::Output { wire: w, player } => {
                let to: Vec<usize> = match player {
                    Some(pl) => vec![pl],
                    None => (0..circuit.n).collect(),
                };
                let shared = wire(w).clone();
                let value = session.open(&shared, &to)?;
                for pl in to {
                    outputs.entry(pl).or_default().push(OutputValue { gate: index, value });
                }
                None
            }
        };
        wires.push(produced);
    }

    Ok(Evaluation {
        outputs,
        views: session.into_views(),
    })
}
