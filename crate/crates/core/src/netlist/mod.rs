// SPDX-License-Identifier: Apache-2.0

//! Gate-level combinational netlists.
//!
//! A [`GateNetlist`] is a DAG of single-output gates over named nets. Every
//! gate is at most two-input; wider functions must be decomposed before they
//! reach this crate. Gates are kept in declaration order, which need not be
//! topological; [`GateNetlist::validate`] establishes acyclicity and computes
//! an evaluation order.

mod eval;
mod parse;
mod random;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use eval::{reference_eval, InputAssignment, ReferenceEvaluator};
pub use parse::parse_netlist;
pub use random::random_netlist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateOp {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Not,
    Buf,
    Const0,
    Const1,
}

impl GateOp {
    pub const ALL: [GateOp; 10] = [
        GateOp::And,
        GateOp::Or,
        GateOp::Xor,
        GateOp::Nand,
        GateOp::Nor,
        GateOp::Xnor,
        GateOp::Not,
        GateOp::Buf,
        GateOp::Const0,
        GateOp::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateOp::Const0 | GateOp::Const1 => 0,
            GateOp::Not | GateOp::Buf => 1,
            _ => 2,
        }
    }

    /// Applies the gate to a word of independent lanes. Unused operands are
    /// ignored.
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateOp::And => a & b,
            GateOp::Or => a | b,
            GateOp::Xor => a ^ b,
            GateOp::Nand => !(a & b),
            GateOp::Nor => !(a | b),
            GateOp::Xnor => !(a ^ b),
            GateOp::Not => !a,
            GateOp::Buf => a,
            GateOp::Const0 => 0,
            GateOp::Const1 => !0,
        }
    }

    pub fn eval_bit(self, a: bool, b: bool) -> bool {
        self.eval_word(a as u64, b as u64) & 1 == 1
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Xor => "XOR",
            GateOp::Nand => "NAND",
            GateOp::Nor => "NOR",
            GateOp::Xnor => "XNOR",
            GateOp::Not => "NOT",
            GateOp::Buf => "BUF",
            GateOp::Const0 => "CONST0",
            GateOp::Const1 => "CONST1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: String,
    pub op: GateOp,
    pub operands: Vec<String>,
}

impl Gate {
    pub fn new(output: impl Into<String>, op: GateOp, operands: &[&str]) -> Self {
        Gate { output: output.into(), op, operands: operands.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported expression at {line}:{col}: {msg}")]
    UnsupportedExpr { line: usize, col: usize, msg: String },
    #[error("undeclared net `{net}`")]
    Undeclared { net: String },
    #[error("net `{net}` is driven more than once")]
    MultiplyDriven { net: String },
    #[error("combinational cycle through net `{net}`")]
    Cycle { net: String },
    #[error("net `{net}` is declared more than once")]
    Redeclared { net: String },
    #[error("primary output `{net}` is never driven")]
    Undriven { net: String },
    #[error("port `{net}`: {msg}")]
    Port { net: String, msg: String },
    #[error("input assignment: {msg}")]
    Assignment { msg: String },
    #[error("gate `{net}`: {op} expects {expected} operands, got {got}")]
    Arity { net: String, op: GateOp, expected: usize, got: usize },
}

/// A validated combinational netlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateNetlist {
    name: String,
    primary_inputs: Vec<String>,
    primary_outputs: Vec<String>,
    gates: Vec<Gate>,
    /// Gate indices in an order where every operand is available.
    topo: Vec<usize>,
}

impl GateNetlist {
    /// Builds and validates a netlist. Gates may be listed in any order.
    pub fn new(
        name: impl Into<String>,
        primary_inputs: Vec<String>,
        primary_outputs: Vec<String>,
        gates: Vec<Gate>,
    ) -> Result<Self, NetlistError> {
        let mut n = GateNetlist { name: name.into(), primary_inputs, primary_outputs, gates, topo: Vec::new() };
        n.topo = n.validate()?;
        Ok(n)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn primary_inputs(&self) -> &[String] {
        &self.primary_inputs
    }

    pub fn primary_outputs(&self) -> &[String] {
        &self.primary_outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate indices in a topological order.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Number of nets: primary inputs plus one per gate output.
    pub fn net_count(&self) -> usize {
        self.primary_inputs.len() + self.gates.len()
    }

    pub fn nets(&self) -> impl Iterator<Item = &str> {
        self.primary_inputs.iter().map(String::as_str).chain(self.gates.iter().map(|g| g.output.as_str()))
    }

    /// Checks every structural invariant and returns a topological gate order.
    pub fn validate(&self) -> Result<Vec<usize>, NetlistError> {
        let mut driver: HashMap<&str, Option<usize>> = HashMap::new();
        for pi in &self.primary_inputs {
            if driver.insert(pi.as_str(), None).is_some() {
                return Err(NetlistError::MultiplyDriven { net: pi.clone() });
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            if g.operands.len() != g.op.arity() {
                return Err(NetlistError::Arity {
                    net: g.output.clone(),
                    op: g.op,
                    expected: g.op.arity(),
                    got: g.operands.len(),
                });
            }
            if driver.insert(g.output.as_str(), Some(i)).is_some() {
                return Err(NetlistError::MultiplyDriven { net: g.output.clone() });
            }
        }
        for g in &self.gates {
            if let Some(op) = g.operands.iter().find(|o| !driver.contains_key(o.as_str())) {
                return Err(NetlistError::Undeclared { net: op.clone() });
            }
        }
        let mut seen = HashSet::new();
        for po in &self.primary_outputs {
            if !seen.insert(po.as_str()) {
                return Err(NetlistError::Redeclared { net: po.clone() });
            }
            match driver.get(po.as_str()) {
                Some(Some(_)) => {}
                Some(None) => {
                    return Err(NetlistError::Port {
                        net: po.clone(),
                        msg: "primary output cannot also be a primary input".into(),
                    })
                }
                None => return Err(NetlistError::Undriven { net: po.clone() }),
            }
        }

        // Kahn's algorithm over gates; primary inputs are ready from the start.
        let mut pending: Vec<usize> = self.gates.iter().map(|g| g.operands.len()).collect();
        let mut fanout: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, g) in self.gates.iter().enumerate() {
            for op in &g.operands {
                fanout.entry(op.as_str()).or_default().push(i);
            }
        }
        let mut queue: VecDeque<&str> = self.primary_inputs.iter().map(String::as_str).collect();
        let mut order = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            if pending[i] == 0 {
                order.push(i);
                queue.push_back(g.output.as_str());
            }
        }
        while let Some(net) = queue.pop_front() {
            if let Some(users) = fanout.get(net) {
                for &u in users {
                    pending[u] -= 1;
                    if pending[u] == 0 {
                        order.push(u);
                        queue.push_back(self.gates[u].output.as_str());
                    }
                }
            }
        }
        if order.len() != self.gates.len() {
            let stuck = pending.iter().position(|&p| p > 0).unwrap();
            return Err(NetlistError::Cycle { net: self.gates[stuck].output.clone() });
        }
        Ok(order)
    }
}

impl fmt::Display for GateNetlist {
    /// Canonical structural-Verilog form accepted by [`parse_netlist`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ports: Vec<&str> = self.primary_inputs.iter().chain(&self.primary_outputs).map(String::as_str).collect();
        writeln!(f, "module {} ({});", self.name, ports.join(", "))?;
        if !self.primary_inputs.is_empty() {
            writeln!(f, "  input {};", self.primary_inputs.join(", "))?;
        }
        if !self.primary_outputs.is_empty() {
            writeln!(f, "  output {};", self.primary_outputs.join(", "))?;
        }
        let outs: HashSet<&str> = self.primary_outputs.iter().map(String::as_str).collect();
        let wires: Vec<&str> = self.gates.iter().map(|g| g.output.as_str()).filter(|n| !outs.contains(n)).collect();
        if !wires.is_empty() {
            writeln!(f, "  wire {};", wires.join(", "))?;
        }
        for g in &self.gates {
            let o = &g.operands;
            let rhs = match g.op {
                GateOp::And => format!("{} & {}", o[0], o[1]),
                GateOp::Or => format!("{} | {}", o[0], o[1]),
                GateOp::Xor => format!("{} ^ {}", o[0], o[1]),
                GateOp::Nand => format!("~({} & {})", o[0], o[1]),
                GateOp::Nor => format!("~({} | {})", o[0], o[1]),
                GateOp::Xnor => format!("~({} ^ {})", o[0], o[1]),
                GateOp::Not => format!("~{}", o[0]),
                GateOp::Buf => o[0].clone(),
                GateOp::Const0 => "1'b0".to_string(),
                GateOp::Const1 => "1'b1".to_string(),
            };
            writeln!(f, "  assign {} = {};", g.output, rhs)?;
        }
        writeln!(f, "endmodule")
    }
}
