// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use thiserror::Error;

use super::program::{BufferSlot, KernelProgram, Opcode, SlotKind, SubKernel, CONST0_NET, CONST1_NET};
use super::{levelize, partition};
use crate::config::{ConfigError, MachineConfig};
use crate::netlist::{GateNetlist, GateOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("data buffer needs {needed} slots but {addr_width}-bit addresses reach only {available}")]
    AddressOverflow { needed: u64, available: u64, addr_width: u32 },
}

/// Compiles a netlist into a [`KernelProgram`] for `cfg`.
///
/// Buffer slots 0 and 1 hold the constants, the primary inputs follow in
/// declaration order, then one slot per gate output in schedule order.
pub fn compile(n: &GateNetlist, cfg: &MachineConfig) -> Result<KernelProgram, CompileError> {
    cfg.validate()?;
    let needed = 2 + n.net_count() as u64;
    if needed > cfg.address_space() {
        return Err(CompileError::AddressOverflow {
            needed,
            available: cfg.address_space(),
            addr_width: cfg.addr_width,
        });
    }

    let leveled = levelize(n);
    let slices = partition(&leveled, cfg.n_dsp);

    let mut buffer = vec![
        BufferSlot { index: 0, net: CONST0_NET.into(), kind: SlotKind::Const0 },
        BufferSlot { index: 1, net: CONST1_NET.into(), kind: SlotKind::Const1 },
    ];
    let mut slot_of: HashMap<&str, u32> = HashMap::new();
    for pi in n.primary_inputs() {
        let index = buffer.len() as u32;
        slot_of.insert(pi, index);
        buffer.push(BufferSlot { index, net: pi.clone(), kind: SlotKind::PrimaryInput });
    }
    let is_output: std::collections::HashSet<&str> = n.primary_outputs().iter().map(String::as_str).collect();
    for slice in &slices {
        for &g in &slice.gates {
            let net = &n.gates()[g].output;
            let index = buffer.len() as u32;
            slot_of.insert(net, index);
            let kind = if is_output.contains(net.as_str()) { SlotKind::Output } else { SlotKind::Internal };
            buffer.push(BufferSlot { index, net: net.clone(), kind });
        }
    }

    let subkernels = slices
        .iter()
        .map(|slice| {
            let mut sk = SubKernel {
                level: slice.level,
                in_addrs: vec![0; 2 * cfg.n_dsp],
                out_addrs: vec![0; cfg.n_dsp],
                opcodes: vec![Opcode::Nop; cfg.n_dsp],
            };
            for (p, &g) in slice.gates.iter().enumerate() {
                let gate = &n.gates()[g];
                let (a, b) = match gate.op {
                    GateOp::Const0 => (0, 0),
                    GateOp::Const1 => (1, 0),
                    _ => {
                        let a = slot_of[gate.operands[0].as_str()];
                        let b = gate.operands.get(1).map_or(0, |o| slot_of[o.as_str()]);
                        (a, b)
                    }
                };
                sk.in_addrs[2 * p] = a;
                sk.in_addrs[2 * p + 1] = b;
                sk.out_addrs[p] = slot_of[gate.output.as_str()];
                sk.opcodes[p] = gate.op.into();
            }
            sk
        })
        .collect();

    Ok(KernelProgram {
        name: n.name().to_string(),
        config: *cfg,
        buffer,
        subkernels,
        n_fanin: n.primary_inputs().len(),
        n_po: n.primary_outputs().len(),
        outputs: n.primary_outputs().to_vec(),
    })
}
