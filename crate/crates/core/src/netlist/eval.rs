// SPDX-License-Identifier: Apache-2.0

//! Scalar, one-assignment-at-a-time evaluation. This is the correctness
//! oracle for the compiler and the machine simulator, so it deliberately
//! shares no code with either.

use std::collections::{BTreeMap, HashMap};

use super::{GateNetlist, GateOp, NetlistError};

/// Values for exactly the primary inputs of a netlist.
pub type InputAssignment = BTreeMap<String, bool>;

/// A netlist flattened to net indices for repeated evaluation.
///
/// Net `i < n_pi` is primary input `i`; net `n_pi + g` is the output of gate `g`.
#[derive(Debug, Clone)]
pub struct ReferenceEvaluator {
    n_pi: usize,
    steps: Vec<(usize, GateOp, usize, usize)>,
    outputs: Vec<usize>,
    names: Vec<String>,
}

impl ReferenceEvaluator {
    pub fn new(n: &GateNetlist) -> Self {
        let names: Vec<String> = n.nets().map(str::to_string).collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let n_pi = n.primary_inputs().len();
        let steps = n
            .topo_order()
            .iter()
            .map(|&g| {
                let gate = &n.gates()[g];
                let a = gate.operands.first().map_or(0, |o| index[o.as_str()]);
                let b = gate.operands.get(1).map_or(a, |o| index[o.as_str()]);
                (n_pi + g, gate.op, a, b)
            })
            .collect();
        let outputs = n.primary_outputs().iter().map(|o| index[o.as_str()]).collect();
        ReferenceEvaluator { n_pi, steps, outputs, names }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_pi
    }

    pub fn net_names(&self) -> &[String] {
        &self.names
    }

    /// Values of every net, given primary-input bits in declaration order.
    pub fn eval_nets(&self, inputs: &[bool]) -> Vec<bool> {
        assert_eq!(inputs.len(), self.n_pi, "input width mismatch");
        let mut v = vec![false; self.names.len()];
        v[..self.n_pi].copy_from_slice(inputs);
        for &(out, op, a, b) in &self.steps {
            v[out] = op.eval_bit(v[a], v[b]);
        }
        v
    }

    /// Primary-output bits in declaration order.
    pub fn eval_outputs(&self, inputs: &[bool]) -> Vec<bool> {
        let v = self.eval_nets(inputs);
        self.outputs.iter().map(|&i| v[i]).collect()
    }
}

/// Value of every net under `a`.
pub fn reference_eval(n: &GateNetlist, a: &InputAssignment) -> Result<BTreeMap<String, bool>, NetlistError> {
    if a.len() != n.primary_inputs().len() {
        return Err(NetlistError::Assignment {
            msg: format!("expected {} inputs, got {}", n.primary_inputs().len(), a.len()),
        });
    }
    let bits = n
        .primary_inputs()
        .iter()
        .map(|pi| {
            a.get(pi).copied().ok_or_else(|| NetlistError::Assignment { msg: format!("missing primary input `{pi}`") })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ev = ReferenceEvaluator::new(n);
    let vals = ev.eval_nets(&bits);
    Ok(ev.names.into_iter().zip(vals).collect())
}
