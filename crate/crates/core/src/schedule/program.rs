// SPDX-License-Identifier: Apache-2.0

//! The compiled artifact: data-buffer layout plus per-sub-kernel address and
//! opcode rows, and its JSON form.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, MachineConfig};
use crate::netlist::GateOp;

pub const CONST0_NET: &str = "1'b0";
pub const CONST1_NET: &str = "1'b1";

/// Per-slot DSP operation. The numeric codes are what goes into the opcode
/// buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Opcode {
    Nop,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Not,
    Buf,
}

impl Opcode {
    pub const ALL: [Opcode; 9] = [
        Opcode::Nop,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Nand,
        Opcode::Nor,
        Opcode::Xnor,
        Opcode::Not,
        Opcode::Buf,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Opcode> {
        Opcode::ALL.get(code as usize).copied()
    }

    pub fn is_unary(self) -> bool {
        matches!(self, Opcode::Not | Opcode::Buf)
    }

    /// The gate this opcode executes; `None` for NOP.
    pub fn gate_op(self) -> Option<GateOp> {
        Some(match self {
            Opcode::Nop => return None,
            Opcode::And => GateOp::And,
            Opcode::Or => GateOp::Or,
            Opcode::Xor => GateOp::Xor,
            Opcode::Nand => GateOp::Nand,
            Opcode::Nor => GateOp::Nor,
            Opcode::Xnor => GateOp::Xnor,
            Opcode::Not => GateOp::Not,
            Opcode::Buf => GateOp::Buf,
        })
    }
}

impl From<GateOp> for Opcode {
    /// Constant gates become a BUF of the matching constant slot.
    fn from(op: GateOp) -> Self {
        match op {
            GateOp::And => Opcode::And,
            GateOp::Or => Opcode::Or,
            GateOp::Xor => Opcode::Xor,
            GateOp::Nand => Opcode::Nand,
            GateOp::Nor => Opcode::Nor,
            GateOp::Xnor => Opcode::Xnor,
            GateOp::Not => Opcode::Not,
            GateOp::Buf | GateOp::Const0 | GateOp::Const1 => Opcode::Buf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Const0,
    Const1,
    PrimaryInput,
    Internal,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSlot {
    pub index: u32,
    pub net: String,
    pub kind: SlotKind,
}

/// One compute cycle of the array: DSP `p` reads `in_addrs[2p]` and
/// `in_addrs[2p + 1]`, applies `opcodes[p]` and writes `out_addrs[p]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubKernel {
    pub level: u32,
    pub in_addrs: Vec<u32>,
    pub out_addrs: Vec<u32>,
    pub opcodes: Vec<Opcode>,
}

impl SubKernel {
    pub fn active_slots(&self) -> usize {
        self.opcodes.iter().filter(|&&o| o != Opcode::Nop).count()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("malformed program document: {0}")]
    Schema(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("buffer layout: {0}")]
    Layout(String),
    #[error("sub-kernel {subkernel}: {msg}")]
    Shape { subkernel: usize, msg: String },
    #[error("sub-kernel {subkernel}: address {addr} outside buffer of {limit} slots")]
    AddressOutOfRange { subkernel: usize, addr: u64, limit: u64 },
    #[error("sub-kernel {subkernel}: slot {addr} read before it is written")]
    ReadBeforeWrite { subkernel: usize, addr: u32 },
    #[error("sub-kernel {subkernel}: slot {addr} cannot be written")]
    IllegalWrite { subkernel: usize, addr: u32 },
    #[error("slot {addr} written more than once")]
    DoubleWrite { addr: u32 },
    #[error("slot {addr} is never written")]
    Unwritten { addr: u32 },
    #[error("level {level}: {got} sub-kernels for {gates} gates at {n_dsp} DSPs")]
    SubkernelCount { level: u32, gates: usize, got: usize, n_dsp: usize },
    #[error("outputs: {0}")]
    Outputs(String),
}

/// A machine-loadable program for one netlist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelProgram {
    pub name: String,
    pub config: MachineConfig,
    pub buffer: Vec<BufferSlot>,
    pub subkernels: Vec<SubKernel>,
    pub n_fanin: usize,
    pub n_po: usize,
    /// Primary-output nets in declaration order. Older documents without it
    /// fall back to buffer order.
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl KernelProgram {
    pub fn n_subkernels(&self) -> usize {
        self.subkernels.len()
    }

    /// Address words per sub-kernel: two operands and one result per DSP.
    pub fn n_subk_addresses(&self) -> usize {
        3 * self.config.n_dsp
    }

    pub fn buffer_size(&self) -> usize {
        self.buffer.len()
    }

    pub fn depth(&self) -> u32 {
        self.subkernels.last().map_or(0, |s| s.level)
    }

    /// Primary-input nets in declaration order.
    pub fn primary_inputs(&self) -> impl Iterator<Item = &str> {
        self.buffer[2..2 + self.n_fanin].iter().map(|s| s.net.as_str())
    }

    /// Buffer slots of the primary outputs in declaration order.
    pub fn output_slots(&self) -> Vec<(String, u32)> {
        if self.outputs.is_empty() {
            self.buffer.iter().filter(|s| s.kind == SlotKind::Output).map(|s| (s.net.clone(), s.index)).collect()
        } else {
            let by_name: HashMap<&str, u32> = self.buffer.iter().map(|s| (s.net.as_str(), s.index)).collect();
            self.outputs.iter().map(|o| (o.clone(), by_name[o.as_str()])).collect()
        }
    }

    /// Active gates per level, recovered from the sub-kernels.
    pub fn gates_per_level(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.depth() as usize];
        for sk in &self.subkernels {
            out[sk.level as usize - 1] += sk.active_slots();
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("program serializes");
        s.push('\n');
        s
    }

    /// Parses and fully re-validates a program document.
    pub fn from_json(text: &str) -> Result<Self, ProgramError> {
        let p: KernelProgram = serde_json::from_str(text).map_err(|e| ProgramError::Schema(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Checks layout, slot-shape and single-assignment schedule invariants.
    pub fn validate(&self) -> Result<(), ProgramError> {
        self.config.validate()?;
        let n_dsp = self.config.n_dsp;
        let size = self.buffer.len() as u64;
        if size > self.config.address_space() {
            return Err(ProgramError::Layout(format!(
                "{size} slots exceed the {}-bit address space",
                self.config.addr_width
            )));
        }
        if self.buffer.len() < 2 + self.n_fanin {
            return Err(ProgramError::Layout("buffer too small for constants and inputs".into()));
        }
        let mut names = HashSet::new();
        for (i, slot) in self.buffer.iter().enumerate() {
            if slot.index as usize != i {
                return Err(ProgramError::Layout(format!("entry {i} has index {}", slot.index)));
            }
            let expected = match i {
                0 => Some(SlotKind::Const0),
                1 => Some(SlotKind::Const1),
                _ if i < 2 + self.n_fanin => Some(SlotKind::PrimaryInput),
                _ => None,
            };
            let ok = match expected {
                Some(k) => slot.kind == k,
                None => matches!(slot.kind, SlotKind::Internal | SlotKind::Output),
            };
            if !ok {
                return Err(ProgramError::Layout(format!("slot {i} has unexpected kind {:?}", slot.kind)));
            }
            if !names.insert(slot.net.as_str()) {
                return Err(ProgramError::Layout(format!("net `{}` appears twice", slot.net)));
            }
        }
        let n_out = self.buffer.iter().filter(|s| s.kind == SlotKind::Output).count();
        if n_out != self.n_po {
            return Err(ProgramError::Outputs(format!("n_po is {} but {n_out} slots are outputs", self.n_po)));
        }
        if !self.outputs.is_empty() {
            let kinds: HashMap<&str, SlotKind> = self.buffer.iter().map(|s| (s.net.as_str(), s.kind)).collect();
            let uniq: HashSet<&str> = self.outputs.iter().map(String::as_str).collect();
            if self.outputs.len() != self.n_po || uniq.len() != self.n_po {
                return Err(ProgramError::Outputs("output list does not match n_po".into()));
            }
            if let Some(o) = self.outputs.iter().find(|o| kinds.get(o.as_str()) != Some(&SlotKind::Output)) {
                return Err(ProgramError::Outputs(format!("`{o}` is not an output slot")));
            }
        }

        let first_gate_slot = (2 + self.n_fanin) as u32;
        // Level at which each slot becomes readable.
        let mut written_at: Vec<Option<u32>> = vec![None; self.buffer.len()];
        for w in written_at.iter_mut().take(first_gate_slot as usize) {
            *w = Some(0);
        }
        let mut prev_level = 1u32;
        let mut per_level: Vec<(u32, usize, usize)> = Vec::new();
        for (t, sk) in self.subkernels.iter().enumerate() {
            if sk.in_addrs.len() != 2 * n_dsp || sk.out_addrs.len() != n_dsp || sk.opcodes.len() != n_dsp {
                return Err(ProgramError::Shape { subkernel: t, msg: format!("rows must hold {n_dsp} slots") });
            }
            if sk.level < prev_level {
                return Err(ProgramError::Shape { subkernel: t, msg: format!("level {} out of order", sk.level) });
            }
            prev_level = sk.level;
            for &a in sk.in_addrs.iter().chain(&sk.out_addrs) {
                if a as u64 >= size {
                    return Err(ProgramError::AddressOutOfRange { subkernel: t, addr: a as u64, limit: size });
                }
            }
            for (p, &op) in sk.opcodes.iter().enumerate() {
                let (a, b, o) = (sk.in_addrs[2 * p], sk.in_addrs[2 * p + 1], sk.out_addrs[p]);
                if op == Opcode::Nop {
                    if (a, b, o) != (0, 0, 0) {
                        return Err(ProgramError::Shape { subkernel: t, msg: format!("NOP slot {p} has addresses") });
                    }
                    continue;
                }
                if op.is_unary() && b != 0 {
                    return Err(ProgramError::Shape {
                        subkernel: t,
                        msg: format!("unary slot {p} has a second operand"),
                    });
                }
                for r in [a, b] {
                    match written_at[r as usize] {
                        Some(l) if l < sk.level => {}
                        _ => return Err(ProgramError::ReadBeforeWrite { subkernel: t, addr: r }),
                    }
                }
                if o < first_gate_slot {
                    return Err(ProgramError::IllegalWrite { subkernel: t, addr: o });
                }
            }
            // Writes land after every read of the same cycle.
            for (p, &op) in sk.opcodes.iter().enumerate() {
                if op == Opcode::Nop {
                    continue;
                }
                let o = sk.out_addrs[p];
                if written_at[o as usize].replace(sk.level).is_some() {
                    return Err(ProgramError::DoubleWrite { addr: o });
                }
            }
            match per_level.last_mut() {
                Some((l, gates, count)) if *l == sk.level => {
                    *gates += sk.active_slots();
                    *count += 1;
                }
                _ => per_level.push((sk.level, sk.active_slots(), 1)),
            }
        }
        if let Some(addr) = written_at.iter().position(Option::is_none) {
            return Err(ProgramError::Unwritten { addr: addr as u32 });
        }
        for (level, gates, got) in per_level {
            if got != gates.div_ceil(n_dsp) {
                return Err(ProgramError::SubkernelCount { level, gates, got, n_dsp });
            }
        }
        Ok(())
    }

    /// Distinct levels present, ascending.
    pub fn levels(&self) -> BTreeSet<u32> {
        self.subkernels.iter().map(|s| s.level).collect()
    }
}
