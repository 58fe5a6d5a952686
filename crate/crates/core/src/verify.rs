// SPDX-License-Identifier: Apache-2.0

//! Oracle harness: run a compiled program on the simulator and compare every
//! output bit with scalar evaluation of the source netlist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::netlist::{GateNetlist, ReferenceEvaluator};
use crate::schedule::KernelProgram;
use crate::sim::{simulate_vectors, SimTally};

/// Largest input count accepted for exhaustive verification.
pub const MAX_EXHAUSTIVE_INPUTS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("exhaustive verification supports at most {MAX_EXHAUSTIVE_INPUTS} inputs, netlist has {0}")]
    TooManyInputs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorSource {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

/// Input vectors in primary-input order. Exhaustive vector `j` sets input
/// `i` to bit `i` of `j`.
pub fn generate_vectors(n_pi: usize, source: VectorSource) -> Result<Vec<Vec<bool>>, VerifyError> {
    match source {
        VectorSource::Exhaustive => {
            if n_pi > MAX_EXHAUSTIVE_INPUTS {
                return Err(VerifyError::TooManyInputs(n_pi));
            }
            Ok((0u64..1 << n_pi).map(|j| (0..n_pi).map(|i| j >> i & 1 == 1).collect()).collect())
        }
        VectorSource::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count).map(|_| (0..n_pi).map(|_| rng.gen()).collect()).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub vector: usize,
    pub inputs: Vec<bool>,
    pub expected: Vec<bool>,
    pub got: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub vectors: usize,
    pub mismatch_count: usize,
    /// First few mismatching vectors.
    pub mismatches: Vec<Mismatch>,
    /// Set when the program could not be run at all.
    pub rejected: Option<String>,
    pub tally: Option<SimTally>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rejected.is_none() && self.mismatch_count == 0
    }

    pub fn matched(&self) -> usize {
        if self.rejected.is_some() {
            0
        } else {
            self.vectors - self.mismatch_count
        }
    }
}

const KEEP_MISMATCHES: usize = 16;

/// Checks `program` against `netlist` on `vectors`.
pub fn verify_program(netlist: &GateNetlist, program: &KernelProgram, vectors: &[Vec<bool>]) -> VerifyReport {
    let rejected = |msg: String| VerifyReport {
        vectors: vectors.len(),
        mismatch_count: vectors.len(),
        mismatches: Vec::new(),
        rejected: Some(msg),
        tally: None,
    };
    if !program.primary_inputs().eq(netlist.primary_inputs().iter().map(String::as_str)) {
        return rejected("program inputs differ from the netlist".into());
    }
    let result = match simulate_vectors(program, vectors) {
        Ok(r) => r,
        Err(e) => return rejected(e.to_string()),
    };
    if result.po_names != netlist.primary_outputs() {
        return rejected("program outputs differ from the netlist".into());
    }
    let oracle = ReferenceEvaluator::new(netlist);
    let mut mismatches = Vec::new();
    let mut mismatch_count = 0;
    for (j, v) in vectors.iter().enumerate() {
        let expected = oracle.eval_outputs(v);
        let got = result.vector(j);
        if expected != got {
            mismatch_count += 1;
            if mismatches.len() < KEEP_MISMATCHES {
                mismatches.push(Mismatch { vector: j, inputs: v.clone(), expected, got });
            }
        }
    }
    VerifyReport { vectors: vectors.len(), mismatch_count, mismatches, rejected: None, tally: Some(result.tally) }
}
