// SPDX-License-Identifier: Apache-2.0

//! Levelization, sub-kernel partitioning and code generation for the
//! DSP array.

mod compile;
mod program;

pub use compile::{compile, CompileError};
pub use program::{BufferSlot, KernelProgram, Opcode, ProgramError, SlotKind, SubKernel, CONST0_NET, CONST1_NET};

use crate::netlist::GateNetlist;

/// A netlist annotated with logic levels.
///
/// Primary inputs sit at level 0 and every gate one above its deepest
/// operand, so gates sharing a level never feed each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeveledNetlist {
    base: GateNetlist,
    level: Vec<u32>,
    gates_per_level: Vec<usize>,
}

impl LeveledNetlist {
    pub fn base(&self) -> &GateNetlist {
        &self.base
    }

    /// Level of gate `g` (declaration index).
    pub fn level(&self, g: usize) -> u32 {
        self.level[g]
    }

    pub fn levels(&self) -> &[u32] {
        &self.level
    }

    pub fn depth(&self) -> u32 {
        self.gates_per_level.len() as u32
    }

    /// Gate counts for levels `1..=depth`.
    pub fn gates_per_level(&self) -> &[usize] {
        &self.gates_per_level
    }
}

/// Assigns each gate its logic level in one pass over a breadth-first
/// (Kahn) order from the primary inputs. Constant gates land on level 1.
pub fn levelize(n: &GateNetlist) -> LeveledNetlist {
    let n_pi = n.primary_inputs().len();
    let index: std::collections::HashMap<&str, usize> = n.nets().enumerate().map(|(i, s)| (s, i)).collect();
    // Level per net; primary inputs stay at 0.
    let mut net_level = vec![0u32; n.net_count()];
    for &g in n.topo_order() {
        let gate = &n.gates()[g];
        let deepest = gate.operands.iter().map(|o| net_level[index[o.as_str()]]).max().unwrap_or(0);
        net_level[n_pi + g] = deepest + 1;
    }
    let level = net_level[n_pi..].to_vec();
    let depth = level.iter().copied().max().unwrap_or(0) as usize;
    let mut gates_per_level = vec![0usize; depth];
    for &l in &level {
        gates_per_level[l as usize - 1] += 1;
    }
    LeveledNetlist { base: n.clone(), level, gates_per_level }
}

/// Gates of one level that execute together in a single compute cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub level: u32,
    /// Declaration indices of the gates, in declaration order.
    pub gates: Vec<usize>,
}

/// Splits each level into `ceil(n_gates / n_dsp)` slices, packing gates
/// greedily in declaration order.
///
/// # Panics
/// If `n_dsp == 0`.
pub fn partition(ln: &LeveledNetlist, n_dsp: usize) -> Vec<Slice> {
    assert!(n_dsp >= 1, "partition needs at least one DSP");
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); ln.depth() as usize];
    for (g, &l) in ln.level.iter().enumerate() {
        by_level[l as usize - 1].push(g);
    }
    by_level
        .into_iter()
        .enumerate()
        .flat_map(|(i, gates)| {
            gates.chunks(n_dsp).map(|c| Slice { level: i as u32 + 1, gates: c.to_vec() }).collect::<Vec<_>>()
        })
        .collect()
}
