// SPDX-License-Identifier: Apache-2.0

//! Functional simulator of the DSP array with per-phase event counters.
//!
//! Each machine word carries `lane_width` independent input vectors. A run
//! copies the primary-input words into the data buffer, then executes every
//! sub-kernel as load / execute / write-back, then streams the outputs out.
//! Counters tick per bus group as the machine walks its fixed-size address
//! rows, so padded (NOP) slots still occupy their group.

use rayon::prelude::*;
use thiserror::Error;

use crate::netlist::InputAssignment;
use crate::schedule::{KernelProgram, Opcode, ProgramError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("primary inputs {got:?} do not match the program's {expected:?}")]
    InputMismatch { expected: Vec<String>, got: Vec<String> },
    #[error("input vector {index} has {got} bits, expected {expected}")]
    VectorWidth { index: usize, expected: usize, got: usize },
    #[error("{lanes} lanes exceed the {width}-lane machine word")]
    LaneOverflow { lanes: usize, width: u32 },
    #[error("slot {addr} read before it was written")]
    ReadBeforeWrite { addr: u32 },
    #[error("slot {addr} is read-only")]
    ReadOnlySlot { addr: u32 },
    #[error("pipeline needs at least one stage")]
    EmptyPipeline,
}

/// Up to one machine word of input vectors, bit-packed per primary input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchInput {
    pi_names: Vec<String>,
    lanes: usize,
    words: Vec<u64>,
}

impl BatchInput {
    /// Packs `vectors[j][i]` (bit of input `i` in vector `j`) into lane `j`.
    pub fn from_vectors(pi_names: Vec<String>, vectors: &[Vec<bool>]) -> Result<Self, SimError> {
        if vectors.len() > 64 {
            return Err(SimError::LaneOverflow { lanes: vectors.len(), width: 64 });
        }
        let mut words = vec![0u64; pi_names.len()];
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != pi_names.len() {
                return Err(SimError::VectorWidth { index: j, expected: pi_names.len(), got: v.len() });
            }
            for (i, &bit) in v.iter().enumerate() {
                words[i] |= (bit as u64) << j;
            }
        }
        Ok(BatchInput { pi_names, lanes: vectors.len(), words })
    }

    /// Raw packed words, one per primary input. Bits above `lanes` are cleared.
    pub fn from_words(pi_names: Vec<String>, lanes: usize, words: Vec<u64>) -> Result<Self, SimError> {
        if lanes > 64 {
            return Err(SimError::LaneOverflow { lanes, width: 64 });
        }
        if words.len() != pi_names.len() {
            return Err(SimError::VectorWidth { index: 0, expected: pi_names.len(), got: words.len() });
        }
        let mask = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
        let words = words.into_iter().map(|w| w & mask).collect();
        Ok(BatchInput { pi_names, lanes, words })
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn pi_names(&self) -> &[String] {
        &self.pi_names
    }
}

/// Event tallies in cycles. Per-batch figures are identical across batches;
/// `n_compute` sums over all of them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimTally {
    pub batches: u64,
    pub n_copy_mem_in: u64,
    pub n_bram_to_dsp_regs: u64,
    pub n_exe_logic_ops: u64,
    pub n_dsp_reg_to_bram: u64,
    pub n_loop_subkernels: u64,
    pub n_outputs: u64,
    pub n_compute_one_ck: u64,
    pub n_compute: u64,
}

impl SimTally {
    fn merge(self, other: SimTally) -> SimTally {
        if self.batches == 0 {
            return other;
        }
        debug_assert_eq!(self.n_compute_one_ck, other.n_compute_one_ck);
        SimTally { batches: self.batches + other.batches, n_compute: self.n_compute + other.n_compute, ..self }
    }

    pub fn fields(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("batches", self.batches),
            ("n_copy_mem_in", self.n_copy_mem_in),
            ("n_BRAM_to_DSP_regs", self.n_bram_to_dsp_regs),
            ("n_exe_logic_ops", self.n_exe_logic_ops),
            ("n_DSP_reg_to_BRAM", self.n_dsp_reg_to_bram),
            ("n_loop_subkernels", self.n_loop_subkernels),
            ("n_outputs", self.n_outputs),
            ("n_compute_one_CK", self.n_compute_one_ck),
            ("n_compute", self.n_compute),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    pub po_names: Vec<String>,
    /// `outputs[k][j]` is primary output `k` for input vector `j`.
    pub outputs: Vec<Vec<bool>>,
    pub tally: SimTally,
}

impl SimResult {
    pub fn lanes(&self) -> usize {
        self.outputs.first().map_or(0, Vec::len)
    }

    /// Output bits of input vector `j`, in primary-output order.
    pub fn vector(&self, j: usize) -> Vec<bool> {
        self.outputs.iter().map(|o| o[j]).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct DspRegs {
    a: u64,
    b: u64,
    out: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Counters {
    copy_words: u64,
    load_groups: u64,
    exec_cycles: u64,
    writeback_groups: u64,
    output_groups: u64,
}

/// Data buffer, DSP register file and counters for one batch.
#[derive(Debug)]
pub struct MachineState<'p> {
    program: &'p KernelProgram,
    data: Vec<u64>,
    written: Vec<bool>,
    regs: Vec<DspRegs>,
    mask: u64,
    counters: Counters,
}

impl<'p> MachineState<'p> {
    pub fn new(program: &'p KernelProgram) -> Self {
        let mask = program.config.lane_mask();
        let mut data = vec![0u64; program.buffer_size()];
        let mut written = vec![false; program.buffer_size()];
        data[1] = mask;
        written[0] = true;
        written[1] = true;
        MachineState {
            program,
            data,
            written,
            regs: vec![DspRegs::default(); program.config.n_dsp],
            mask,
            counters: Counters::default(),
        }
    }

    pub fn word(&self, addr: u32) -> u64 {
        self.data[addr as usize]
    }

    fn read(&self, addr: u32) -> Result<u64, SimError> {
        if !self.written[addr as usize] {
            return Err(SimError::ReadBeforeWrite { addr });
        }
        Ok(self.data[addr as usize])
    }

    fn write(&mut self, addr: u32, value: u64) -> Result<(), SimError> {
        if addr < 2 {
            return Err(SimError::ReadOnlySlot { addr });
        }
        self.data[addr as usize] = value & self.mask;
        self.written[addr as usize] = true;
        Ok(())
    }

    /// One word copy per primary input into the (replicated) input buffer.
    fn copy_in(&mut self, words: &[u64]) -> Result<(), SimError> {
        for (i, &w) in words.iter().enumerate() {
            self.write(2 + i as u32, w)?;
            self.counters.copy_words += 1;
        }
        Ok(())
    }

    fn run_subkernel(&mut self, t: usize) -> Result<(), SimError> {
        let program = self.program;
        let sk = &program.subkernels[t];
        let lambda = program.config.lambda() as usize;

        // Operand addresses are fetched lambda at a time.
        for (g, group) in sk.in_addrs.chunks(lambda).enumerate() {
            self.counters.load_groups += 1;
            for (k, &addr) in group.iter().enumerate() {
                let pos = g * lambda + k;
                let p = pos / 2;
                if sk.opcodes[p] == Opcode::Nop {
                    continue;
                }
                let v = self.read(addr)?;
                if pos.is_multiple_of(2) {
                    self.regs[p].a = v;
                } else {
                    self.regs[p].b = v;
                }
            }
        }

        self.counters.exec_cycles += program.config.n_exe_logic_ops;
        for (p, &op) in sk.opcodes.iter().enumerate() {
            if let Some(gate) = op.gate_op() {
                let r = &mut self.regs[p];
                r.out = gate.eval_word(r.a, r.b);
            }
        }

        // One result register per DSP: result addresses also go lambda at a
        // time, half as many groups as the operand loads.
        for (g, group) in sk.out_addrs.chunks(lambda).enumerate() {
            self.counters.writeback_groups += 1;
            for (k, &addr) in group.iter().enumerate() {
                let p = g * lambda + k;
                if sk.opcodes[p] != Opcode::Nop {
                    let v = self.regs[p].out;
                    self.write(addr, v)?;
                }
            }
        }
        Ok(())
    }

    /// Output words leave packed `delta` per bus beat.
    fn copy_out(&mut self, slots: &[u32]) -> Result<Vec<u64>, SimError> {
        let delta = self.program.config.delta() as usize;
        let mut out = Vec::with_capacity(slots.len());
        for group in slots.chunks(delta) {
            self.counters.output_groups += 1;
            for &s in group {
                out.push(self.read(s)?);
            }
        }
        Ok(out)
    }

    fn tally(&self) -> SimTally {
        let c = self.counters;
        let n_loop_subkernels = c.load_groups + c.exec_cycles + c.writeback_groups;
        let one_ck = c.copy_words + n_loop_subkernels + c.output_groups;
        SimTally {
            batches: 1,
            n_copy_mem_in: c.copy_words,
            n_bram_to_dsp_regs: c.load_groups,
            n_exe_logic_ops: c.exec_cycles,
            n_dsp_reg_to_bram: c.writeback_groups,
            n_loop_subkernels,
            n_outputs: c.output_groups,
            n_compute_one_ck: one_ck,
            n_compute: one_ck,
        }
    }
}

fn check_inputs(p: &KernelProgram, names: &[String]) -> Result<(), SimError> {
    if !p.primary_inputs().eq(names.iter().map(String::as_str)) {
        return Err(SimError::InputMismatch {
            expected: p.primary_inputs().map(str::to_string).collect(),
            got: names.to_vec(),
        });
    }
    Ok(())
}

/// Runs one batch on an already validated program; returns packed output words.
fn run_batch(p: &KernelProgram, out_slots: &[u32], words: &[u64]) -> Result<(Vec<u64>, SimTally), SimError> {
    let mut m = MachineState::new(p);
    m.copy_in(words)?;
    for t in 0..p.subkernels.len() {
        m.run_subkernel(t)?;
    }
    let out = m.copy_out(out_slots)?;
    Ok((out, m.tally()))
}

fn unpack(words: &[u64], lanes: usize) -> Vec<Vec<bool>> {
    words.iter().map(|w| (0..lanes).map(|j| w >> j & 1 == 1).collect()).collect()
}

/// Executes `p` on one batch of up to `lane_width` input vectors.
pub fn simulate(p: &KernelProgram, input: &BatchInput) -> Result<SimResult, SimError> {
    p.validate()?;
    check_inputs(p, &input.pi_names)?;
    if input.lanes > p.config.lane_width as usize {
        return Err(SimError::LaneOverflow { lanes: input.lanes, width: p.config.lane_width });
    }
    let (po_names, slots): (Vec<String>, Vec<u32>) = p.output_slots().into_iter().unzip();
    let (words, tally) = run_batch(p, &slots, &input.words)?;
    Ok(SimResult { po_names, outputs: unpack(&words, input.lanes), tally })
}

/// Packs raw input vectors (bits in primary-input order) into full-width
/// batches, runs them, and concatenates outputs in input order.
pub fn simulate_vectors(p: &KernelProgram, vectors: &[Vec<bool>]) -> Result<SimResult, SimError> {
    p.validate()?;
    let n_pi = p.n_fanin;
    if let Some((index, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != n_pi) {
        return Err(SimError::VectorWidth { index, expected: n_pi, got: v.len() });
    }
    let (po_names, slots): (Vec<String>, Vec<u32>) = p.output_slots().into_iter().unzip();
    let width = p.config.lane_width as usize;
    let batches: Vec<(Vec<u64>, SimTally, usize)> = vectors
        .par_chunks(width)
        .map(|chunk| {
            let mut words = vec![0u64; n_pi];
            for (j, v) in chunk.iter().enumerate() {
                for (i, &bit) in v.iter().enumerate() {
                    words[i] |= (bit as u64) << j;
                }
            }
            run_batch(p, &slots, &words).map(|(w, t)| (w, t, chunk.len()))
        })
        .collect::<Result<_, _>>()?;

    let mut outputs = vec![Vec::with_capacity(vectors.len()); slots.len()];
    let mut tally = SimTally::default();
    for (words, t, lanes) in batches {
        for (k, w) in words.iter().enumerate() {
            outputs[k].extend((0..lanes).map(|j| w >> j & 1 == 1));
        }
        tally = tally.merge(t);
    }
    Ok(SimResult { po_names, outputs, tally })
}

/// [`simulate_vectors`] over named assignments.
pub fn simulate_stream(p: &KernelProgram, raw: &[InputAssignment]) -> Result<SimResult, SimError> {
    let names: Vec<String> = p.primary_inputs().map(str::to_string).collect();
    let vectors = raw
        .iter()
        .map(|a| {
            if a.len() != names.len() || !names.iter().all(|n| a.contains_key(n)) {
                return Err(SimError::InputMismatch { expected: names.clone(), got: a.keys().cloned().collect() });
            }
            Ok(names.iter().map(|n| a[n]).collect())
        })
        .collect::<Result<Vec<Vec<bool>>, _>>()?;
    simulate_vectors(p, &vectors)
}

/// Per-FFCL stage costs for the double-buffered pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageCost {
    pub data_moves: u64,
    pub compute: u64,
}

/// Two-stage pipeline over `m` FFCLs, every stage charged at the worst
/// stage time: `(m + 1) * max_i max(D_i, C_i)`.
pub fn pipeline_schedule(stages: &[StageCost]) -> Result<u64, SimError> {
    let worst = stages.iter().map(|s| s.data_moves.max(s.compute)).max().ok_or(SimError::EmptyPipeline)?;
    Ok((stages.len() as u64 + 1) * worst)
}
