//! Exhaustive check that a curious coalition learns nothing beyond its own
//! inputs and outputs.
//!
//! For every assignment of all inputs, the coalition's joint view is
//! tabulated over every possible random tape. Assignments that agree on
//! the coalition's inputs and outputs must produce identical view
//! distributions.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::circuit::{evaluate_circuit, Circuit, OutputValue};
use super::field::{check_prime, CountingCoins, TapeCoins};
use super::session::ViewEntry;
use super::MpcError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditWitness {
    /// Input values of the coalition, by input gate.
    pub coalition_inputs: Vec<(usize, u64)>,
    pub coalition_outputs: Vec<(usize, Vec<OutputValue>)>,
    /// Two assignments of the other players' inputs that the coalition can
    /// tell apart.
    pub others_first: Vec<(usize, u64)>,
    pub others_second: Vec<(usize, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub pass: bool,
    pub runs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AuditWitness>,
}

type View = Vec<Vec<ViewEntry>>;
type Distribution = BTreeMap<View, u64>;

fn digits(mut index: u64, base: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = index % base;
        index /= base;
    }
    out
}

fn checked_pow(base: u64, exp: usize) -> u128 {
    (0..exp)
        .try_fold(1u128, |acc, _| acc.checked_mul(base as u128))
        .unwrap_or(u128::MAX)
}

pub fn privacy_audit(circuit: &Circuit, coalition: &BTreeSet<usize>, cap: u64) -> Result<AuditReport, MpcError> {
    circuit.validate()?;
    check_prime(circuit.modulus)?;
    let n = circuit.n;
    if coalition.len() > circuit.max_private_threshold() {
        return Err(MpcError::CoalitionTooLarge {
            size: coalition.len(),
            n,
        });
    }
    if let Some(&bad) = coalition.iter().find(|&&pl| pl >= n) {
        return Err(MpcError::InvalidCircuit(format!("coalition member {bad} is not a player")));
    }
    let p = circuit.modulus;
    let input_gates = circuit.input_gates();

    let assignment = |values: &[u64]| -> BTreeMap<usize, Vec<u64>> {
        let mut m: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (&(_, owner), &v) in input_gates.iter().zip(values) {
            m.entry(owner).or_default().push(v);
        }
        m
    };

    // The number of coins drawn does not depend on the inputs.
    let mut counter = CountingCoins::default();
    evaluate_circuit(circuit, &assignment(&vec![0; input_gates.len()]), &mut counter)?;
    let draws = counter.drawn;

    let input_space = checked_pow(p, input_gates.len());
    let tape_space = checked_pow(p, draws);
    let size = input_space.saturating_mul(tape_space);
    if size > cap as u128 {
        return Err(MpcError::SearchSpaceTooLarge { size, cap });
    }
    let (input_space, tape_space) = (input_space as u64, tape_space as u64);

    let members: Vec<usize> = coalition.iter().copied().collect();
    let tabulated: Vec<(Vec<u64>, Vec<(usize, Vec<OutputValue>)>, Distribution)> = (0..input_space)
        .into_par_iter()
        .map(|index| {
            let values = digits(index, p, input_gates.len());
            let inputs = assignment(&values);
            let mut dist = Distribution::new();
            let mut outputs = Vec::new();
            for tape_index in 0..tape_space {
                let tape = digits(tape_index, p, draws);
                let eval = evaluate_circuit(circuit, &inputs, &mut TapeCoins::new(&tape))?;
                let view: View = members.iter().map(|&m| eval.views[m].clone()).collect();
                *dist.entry(view).or_insert(0) += 1;
                if tape_index == 0 {
                    outputs = members
                        .iter()
                        .map(|&m| (m, eval.outputs.get(&m).cloned().unwrap_or_default()))
                        .collect();
                }
            }
            Ok((values, outputs, dist))
        })
        .collect::<Result<_, MpcError>>()?;

    let split = |values: &[u64]| -> (Vec<(usize, u64)>, Vec<(usize, u64)>) {
        let mut mine = Vec::new();
        let mut others = Vec::new();
        for (&(gate, owner), &v) in input_gates.iter().zip(values) {
            if coalition.contains(&owner) {
                mine.push((gate, v));
            } else {
                others.push((gate, v));
            }
        }
        (mine, others)
    };

    let mut classes: BTreeMap<(Vec<(usize, u64)>, Vec<(usize, Vec<OutputValue>)>), (Vec<(usize, u64)>, &Distribution)> =
        BTreeMap::new();
    for (values, outputs, dist) in &tabulated {
        let (mine, others) = split(values);
        let key = (mine, outputs.clone());
        match classes.get(&key) {
            None => {
                classes.insert(key, (others, dist));
            }
            Some((first_others, first_dist)) if *first_dist != dist => {
                return Ok(AuditReport {
                    pass: false,
                    runs: input_space * tape_space,
                    witness: Some(AuditWitness {
                        coalition_inputs: key.0,
                        coalition_outputs: key.1,
                        others_first: first_others.clone(),
                        others_second: others,
                    }),
                });
            }
            Some(_) => {}
        }
    }
    Ok(AuditReport {
        pass: true,
        runs: input_space * tape_space,
        witness: None,
    })
}
