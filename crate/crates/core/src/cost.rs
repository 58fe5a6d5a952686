// SPDX-License-Identifier: Apache-2.0

//! Closed-form cycle model of the DSP array.
//!
//! Total cost for `m` pipelined FFCLs is `(m + 1) * max(data_moves, compute)`
//! where data movement overlaps address distribution with the
//! input/opcode transfer, and compute is one load/execute/write-back round
//! per sub-kernel per packed input batch. Fractional address-traffic terms
//! are kept as exact rationals and rounded up once, at the final cycle count.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::MachineConfig;
use crate::schedule::KernelProgram;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("at least two DDR banks are required, got {0}")]
    DdrBanks(u32),
    #[error("n_dsp must be at least 1")]
    NoDsp,
    #[error("m must be at least 1")]
    NoFfcl,
    #[error("n_subkernels {given} disagrees with gates_per_level ({derived})")]
    Inconsistent { given: u64, derived: u64 },
}

/// Per-FFCL workload figures the model consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadStats {
    /// Derived from `gates_per_level` when absent.
    #[serde(default)]
    pub n_subkernels: Option<u64>,
    pub n_dsp: u64,
    pub n_fanin: u64,
    pub n_po: u64,
    /// Packed input batches (one lane-width word per input per batch).
    #[serde(default = "one")]
    pub n_input_vectors: u64,
    #[serde(default = "one")]
    pub m: u64,
    #[serde(default)]
    pub gates_per_level: Option<Vec<u64>>,
}

fn one() -> u64 {
    1
}

impl WorkloadStats {
    /// Statistics of a compiled program for `batches` packed input batches.
    pub fn from_program(p: &KernelProgram, batches: u64, m: u64) -> Self {
        WorkloadStats {
            n_subkernels: Some(p.n_subkernels() as u64),
            n_dsp: p.config.n_dsp as u64,
            n_fanin: p.n_fanin as u64,
            n_po: p.n_po as u64,
            n_input_vectors: batches,
            m,
            gates_per_level: Some(p.gates_per_level().into_iter().map(|g| g as u64).collect()),
        }
    }

    /// Sub-kernel count, taken from `gates_per_level` when present.
    pub fn subkernels(&self) -> Result<u64, CostError> {
        match (&self.gates_per_level, self.n_subkernels) {
            (Some(levels), given) => {
                if self.n_dsp == 0 {
                    return Err(CostError::NoDsp);
                }
                let derived = subkernels_from_levels(levels, self.n_dsp);
                match given {
                    Some(g) if g != derived => Err(CostError::Inconsistent { given: g, derived }),
                    _ => Ok(derived),
                }
            }
            (None, Some(s)) => Ok(s),
            (None, None) => Ok(0),
        }
    }

    /// The same workload at a different DSP count. Requires `gates_per_level`
    /// for the sub-kernel count to follow.
    pub fn at_dsp(&self, n_dsp: u64) -> Self {
        let n_subkernels = match &self.gates_per_level {
            Some(_) => None,
            None => self.n_subkernels,
        };
        WorkloadStats { n_dsp, n_subkernels, ..self.clone() }
    }
}

/// Number of sub-kernels: each level contributes `ceil(gates / n_dsp)`.
pub fn subkernels_from_levels(gates_per_level: &[u64], n_dsp: u64) -> u64 {
    assert!(n_dsp >= 1, "n_dsp must be at least 1");
    gates_per_level.iter().map(|g| g.div_ceil(n_dsp)).sum()
}

fn ceil_ratio(r: Ratio<u64>) -> u64 {
    r.ceil().to_integer()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddrMovement {
    pub alpha: Ratio<u64>,
    pub beta: Ratio<u64>,
    pub n_am_dram_to_uram_opt: u64,
    pub n_am_uram_to_bram_opt: u64,
    pub n_read_addr_mem_opt: u64,
}

/// Address traffic from DRAM over `k - 1` banks into URAM, then fanned out
/// to the BRAMs through dual ports.
pub fn addr_movement_cost(w: &WorkloadStats, cfg: &MachineConfig) -> Result<AddrMovement, CostError> {
    let k = cfg.k_ddr_banks as u64;
    if k < 2 {
        return Err(CostError::DdrBanks(cfg.k_ddr_banks));
    }
    let alpha = Ratio::new(3, cfg.lambda() * (k - 1));
    let beta = Ratio::new(k + 1, 2) * alpha;
    let work = Ratio::from_integer(w.subkernels()? * w.n_dsp);
    let dram_to_uram = alpha * work;
    Ok(AddrMovement {
        alpha,
        beta,
        n_am_dram_to_uram_opt: ceil_ratio(dram_to_uram),
        n_am_uram_to_bram_opt: ceil_ratio(dram_to_uram / 2),
        n_read_addr_mem_opt: ceil_ratio(beta * work),
    })
}

/// Packed input words plus packed opcodes, both from the single
/// input/opcode bank.
pub fn input_opcode_cost(w: &WorkloadStats, cfg: &MachineConfig) -> Result<u64, CostError> {
    let inputs = (w.n_input_vectors * w.n_fanin).div_ceil(cfg.delta());
    let opcodes = (w.subkernels()? * w.n_dsp).div_ceil(cfg.zeta());
    Ok(inputs + opcodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComputeCost {
    pub n_bram_to_dsp_regs_opt: u64,
    pub n_dsp_reg_to_bram_opt: u64,
    pub n_loop_subkernels: u64,
    pub n_copy_mem_in: u64,
    pub n_outputs: u64,
    pub n_compute_one_ck: u64,
    pub n_compute: u64,
}

/// Compute-phase cycles. Operand loads go through `lambda / 2` dual-ported
/// replicas of the input buffer; results return at half that rate since each
/// DSP has a single output register. Output words pack onto the bus like
/// input words.
pub fn compute_cost(w: &WorkloadStats, cfg: &MachineConfig) -> Result<ComputeCost, CostError> {
    let load = (2 * w.n_dsp).div_ceil(cfg.lambda());
    let write_back = load.div_ceil(2);
    let n_loop_subkernels = w.subkernels()? * (load + cfg.n_exe_logic_ops + write_back);
    let n_copy_mem_in = w.n_fanin;
    let n_outputs = w.n_po.div_ceil(cfg.delta());
    let n_compute_one_ck = n_copy_mem_in + n_loop_subkernels + n_outputs;
    Ok(ComputeCost {
        n_bram_to_dsp_regs_opt: load,
        n_dsp_reg_to_bram_opt: write_back,
        n_loop_subkernels,
        n_copy_mem_in,
        n_outputs,
        n_compute_one_ck,
        n_compute: w.n_input_vectors * n_compute_one_ck,
    })
}

/// Every intermediate of the model for one workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostBreakdown {
    pub n_subkernels: u64,
    pub alpha: Ratio<u64>,
    pub beta: Ratio<u64>,
    pub n_am_dram_to_uram_opt: u64,
    pub n_am_uram_to_bram_opt: u64,
    pub n_read_addr_mem_opt: u64,
    pub n_read_inputs_opcode_mem_opt: u64,
    pub n_data_moves_opt: u64,
    pub n_bram_to_dsp_regs_opt: u64,
    pub n_dsp_reg_to_bram_opt: u64,
    pub n_loop_subkernels: u64,
    pub n_copy_mem_in: u64,
    pub n_outputs: u64,
    pub n_compute_one_ck: u64,
    pub n_compute: u64,
    pub n_cc_opt: u64,
}

impl CostBreakdown {
    /// Cost of one pipeline stage: the slower of data movement and compute.
    pub fn stage(&self) -> u64 {
        self.n_data_moves_opt.max(self.n_compute)
    }

    /// `(name, value)` pairs in a fixed order for flat reports.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n_subkernels", self.n_subkernels.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("n_AM_DRAM_to_URAM_opt", self.n_am_dram_to_uram_opt.to_string()),
            ("n_AM_URAM_to_BRAM_opt", self.n_am_uram_to_bram_opt.to_string()),
            ("n_read_addr_mem_opt", self.n_read_addr_mem_opt.to_string()),
            ("n_read_inputs_opcode_mem_opt", self.n_read_inputs_opcode_mem_opt.to_string()),
            ("n_data_moves_opt", self.n_data_moves_opt.to_string()),
            ("n_BRAM_to_DSP_regs_opt", self.n_bram_to_dsp_regs_opt.to_string()),
            ("n_DSP_reg_to_BRAM_opt", self.n_dsp_reg_to_bram_opt.to_string()),
            ("n_loop_subkernels", self.n_loop_subkernels.to_string()),
            ("n_copy_mem_in", self.n_copy_mem_in.to_string()),
            ("n_outputs", self.n_outputs.to_string()),
            ("n_compute_one_CK", self.n_compute_one_ck.to_string()),
            ("n_compute", self.n_compute.to_string()),
            ("n_cc_opt", self.n_cc_opt.to_string()),
        ]
    }
}

pub fn total_cost(w: &WorkloadStats, cfg: &MachineConfig) -> Result<CostBreakdown, CostError> {
    if w.m == 0 {
        return Err(CostError::NoFfcl);
    }
    if w.n_dsp == 0 {
        return Err(CostError::NoDsp);
    }
    let addr = addr_movement_cost(w, cfg)?;
    let inputs = input_opcode_cost(w, cfg)?;
    let compute = compute_cost(w, cfg)?;
    let data_moves = inputs.max(addr.n_read_addr_mem_opt);
    Ok(CostBreakdown {
        n_subkernels: w.subkernels()?,
        alpha: addr.alpha,
        beta: addr.beta,
        n_am_dram_to_uram_opt: addr.n_am_dram_to_uram_opt,
        n_am_uram_to_bram_opt: addr.n_am_uram_to_bram_opt,
        n_read_addr_mem_opt: addr.n_read_addr_mem_opt,
        n_read_inputs_opcode_mem_opt: inputs,
        n_data_moves_opt: data_moves,
        n_bram_to_dsp_regs_opt: compute.n_bram_to_dsp_regs_opt,
        n_dsp_reg_to_bram_opt: compute.n_dsp_reg_to_bram_opt,
        n_loop_subkernels: compute.n_loop_subkernels,
        n_copy_mem_in: compute.n_copy_mem_in,
        n_outputs: compute.n_outputs,
        n_compute_one_ck: compute.n_compute_one_ck,
        n_compute: compute.n_compute,
        n_cc_opt: (w.m + 1) * data_moves.max(compute.n_compute),
    })
}
