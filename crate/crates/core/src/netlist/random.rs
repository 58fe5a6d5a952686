// SPDX-License-Identifier: Apache-2.0

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Gate, GateNetlist, GateOp};

const OPS: [GateOp; 8] =
    [GateOp::And, GateOp::Or, GateOp::Xor, GateOp::Nand, GateOp::Nor, GateOp::Xnor, GateOp::Not, GateOp::Buf];

/// Nets within this distance of the newest one are preferred as operands so
/// that generated circuits have non-trivial depth.
const LOCAL_WINDOW: usize = 16;

/// Seeded random combinational netlist for fuzzing.
///
/// Inputs are `i0..`, gate outputs `n0..`; outputs are a random subset of the
/// gate outputs listed in gate order.
///
/// # Panics
/// If `n_pi == 0`, `n_po == 0` or `n_gates < n_po`.
pub fn random_netlist(seed: u64, n_pi: usize, n_gates: usize, n_po: usize) -> GateNetlist {
    assert!(n_pi >= 1 && n_po >= 1 && n_gates >= n_po, "random_netlist: bad sizes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nets: Vec<String> = (0..n_pi).map(|i| format!("i{i}")).collect();
    let mut gates = Vec::with_capacity(n_gates);
    for g in 0..n_gates {
        let op = OPS[rng.gen_range(0..OPS.len())];
        let pick = |rng: &mut ChaCha8Rng| {
            let hi = nets.len();
            let i = if hi > LOCAL_WINDOW && rng.gen_bool(0.5) {
                rng.gen_range(hi - LOCAL_WINDOW..hi)
            } else {
                rng.gen_range(0..hi)
            };
            nets[i].clone()
        };
        let operands = (0..op.arity()).map(|_| pick(&mut rng)).collect();
        let out = format!("n{g}");
        gates.push(Gate { output: out.clone(), op, operands });
        nets.push(out);
    }
    let mut chosen = sample(&mut rng, n_gates, n_po).into_vec();
    chosen.sort_unstable();
    let outputs = chosen.into_iter().map(|g| format!("n{g}")).collect();
    let inputs = nets[..n_pi].to_vec();
    GateNetlist::new(format!("rand{seed}"), inputs, outputs, gates).expect("generator builds valid DAGs")
}
