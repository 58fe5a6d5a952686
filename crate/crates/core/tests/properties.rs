// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use ffcl_core::config::MachineConfig;
use ffcl_core::cost::{subkernels_from_levels, total_cost, WorkloadStats};
use ffcl_core::netlist::{parse_netlist, random_netlist, GateNetlist, GateOp, ReferenceEvaluator};
use ffcl_core::optimize::{network_cost, optimize_dsp, FilterStats, LayerSpec, NetworkSpec};
use ffcl_core::schedule::{compile, levelize, KernelProgram};
use ffcl_core::sim::simulate_vectors;

fn small_netlist() -> impl Strategy<Value = GateNetlist> {
    (any::<u64>(), 1usize..=12, 1usize..=300).prop_flat_map(|(seed, n_pi, n_gates)| {
        (1usize..=n_gates.min(12)).prop_map(move |n_po| random_netlist(seed, n_pi, n_gates, n_po))
    })
}

fn truth(op: GateOp, a: bool, b: bool) -> bool {
    match op {
        GateOp::And => a && b,
        GateOp::Or => a || b,
        GateOp::Xor => a != b,
        GateOp::Nand => !(a && b),
        GateOp::Nor => !(a || b),
        GateOp::Xnor => a == b,
        GateOp::Not => !a,
        GateOp::Buf => a,
        GateOp::Const0 => false,
        GateOp::Const1 => true,
    }
}

fn vectors(n_pi: usize, count: usize, seed: u64) -> Vec<Vec<bool>> {
    (0..count as u64)
        .map(|j| (0..n_pi as u64).map(|i| (j.wrapping_mul(0x9e37) ^ seed ^ (i * 31)) >> (i % 7) & 1 == 1).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_ops_match_truth_tables(a: u64, b: u64) {
        for op in GateOp::ALL {
            let w = op.eval_word(a, b);
            for bit in 0..64 {
                prop_assert_eq!(w >> bit & 1 == 1, truth(op, a >> bit & 1 == 1, b >> bit & 1 == 1), "{} bit {}", op, bit);
            }
        }
    }

    #[test]
    fn print_then_parse_is_identity(n in small_netlist()) {
        let text = n.to_string();
        let back = parse_netlist(&text).unwrap();
        prop_assert_eq!(&back, &n);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn subkernel_count_is_sum_of_level_ceilings(n in small_netlist(), n_dsp in 1usize..=4096) {
        let levels: Vec<u64> = levelize(&n).gates_per_level().iter().map(|&g| g as u64).collect();
        let p = compile(&n, &MachineConfig::with_dsp(n_dsp)).unwrap();
        prop_assert_eq!(p.n_subkernels() as u64, subkernels_from_levels(&levels, n_dsp as u64));
        prop_assert_eq!(p.depth() as usize, levels.len());
    }

    #[test]
    fn more_dsps_never_add_subkernels(levels in prop::collection::vec(1u64..5000, 1..40), n in 1u64..4096) {
        prop_assert!(subkernels_from_levels(&levels, n + 1) <= subkernels_from_levels(&levels, n));
        prop_assert!(subkernels_from_levels(&levels, n) >= levels.len() as u64);
    }

    #[test]
    fn compiled_programs_are_legal_and_deterministic(n in small_netlist(), n_dsp in 1usize..=64) {
        let cfg = MachineConfig::with_dsp(n_dsp);
        let p = compile(&n, &cfg).unwrap();
        prop_assert!(p.validate().is_ok());
        prop_assert_eq!(&compile(&n, &cfg).unwrap(), &p);
        prop_assert_eq!(&KernelProgram::from_json(&p.to_json()).unwrap(), &p);
    }

    #[test]
    fn outputs_do_not_depend_on_dsp_count_or_packing(n in small_netlist(), n_dsp in 1usize..=64, count in 1usize..=130) {
        let vs = vectors(n.primary_inputs().len(), count, n_dsp as u64);
        let oracle = ReferenceEvaluator::new(&n);
        let wide = simulate_vectors(&compile(&n, &MachineConfig::with_dsp(n_dsp)).unwrap(), &vs).unwrap();
        let serial = compile(&n, &MachineConfig::with_dsp(1)).unwrap();
        for (j, v) in vs.iter().enumerate() {
            prop_assert_eq!(wide.vector(j), oracle.eval_outputs(v));
            // one lane at a time
            let alone = simulate_vectors(&serial, std::slice::from_ref(v)).unwrap();
            prop_assert_eq!(alone.vector(0), wide.vector(j));
        }
    }

    #[test]
    fn model_matches_simulator(n in small_netlist(), n_dsp in 1usize..=100, lane_width in 1u32..=64, count in 1usize..=200) {
        let cfg = MachineConfig { lane_width, ..MachineConfig::with_dsp(n_dsp) };
        let p = compile(&n, &cfg).unwrap();
        let sim = simulate_vectors(&p, &vectors(n.primary_inputs().len(), count, 7)).unwrap();
        let batches = count.div_ceil(lane_width as usize) as u64;
        let model = total_cost(&WorkloadStats::from_program(&p, batches, 1), &cfg).unwrap();
        prop_assert_eq!(sim.tally.batches, batches);
        prop_assert_eq!(model.n_copy_mem_in, sim.tally.n_copy_mem_in);
        prop_assert_eq!(model.n_loop_subkernels, sim.tally.n_loop_subkernels);
        prop_assert_eq!(model.n_outputs, sim.tally.n_outputs);
        prop_assert_eq!(model.n_compute_one_ck, sim.tally.n_compute_one_ck);
        prop_assert_eq!(model.n_compute, sim.tally.n_compute);
    }

    #[test]
    fn corrupted_address_is_rejected(n in small_netlist(), n_dsp in 1usize..=16, pick: prop::sample::Index, bits in 0u32..18) {
        let mut p = compile(&n, &MachineConfig::with_dsp(n_dsp)).unwrap();
        let t = pick.index(p.subkernels.len());
        let bad = (1u32 << 14) + bits;
        let active = p.subkernels[t].active_slots();
        p.subkernels[t].out_addrs[active - 1] = bad;
        prop_assert!(KernelProgram::from_json(&p.to_json()).is_err());
    }

    #[test]
    fn cost_grows_with_work(
        levels in prop::collection::vec(1u64..3000, 1..30),
        n_dsp in 1u64..2048,
        n_fanin in 1u64..600,
        n_po in 1u64..100,
        v in 1u64..20,
        m in 1u64..10,
    ) {
        let cfg = MachineConfig::default();
        let w = WorkloadStats {
            n_subkernels: None, n_dsp, n_fanin, n_po, n_input_vectors: v, m, gates_per_level: Some(levels.clone()),
        };
        let base = total_cost(&w, &cfg).unwrap();
        let more_v = total_cost(&WorkloadStats { n_input_vectors: v + 1, ..w.clone() }, &cfg).unwrap();
        prop_assert!(more_v.n_cc_opt >= base.n_cc_opt);
        let mut deeper = levels.clone();
        deeper.push(1);
        let more_levels = total_cost(&WorkloadStats { gates_per_level: Some(deeper), ..w.clone() }, &cfg).unwrap();
        prop_assert!(more_levels.n_cc_opt >= base.n_cc_opt);
        // m and 2m kernels share the per-stage maximum, so the ratio is exact.
        let doubled = total_cost(&WorkloadStats { m: 2 * m, ..w.clone() }, &cfg).unwrap();
        prop_assert_eq!(doubled.n_cc_opt * (m + 1), base.n_cc_opt * (2 * m + 1));
    }

    #[test]
    fn layer_costs_add_without_parallelism(
        a in prop::collection::vec(1u64..3000, 1..12),
        b in prop::collection::vec(1u64..3000, 1..12),
        fa in 1u64..40,
        fb in 1u64..40,
        n_dsp in 1u64..512,
    ) {
        let layer = |levels: Vec<u64>, n_filter| LayerSpec {
            name: String::new(),
            n_filter,
            stats: FilterStats { gates_per_level: levels, n_fanin: 32, n_po: 4, n_input_vectors: 2 },
        };
        let net = |layers| NetworkSpec { layers, n_parallel_factor: 1, n_dsp_max: 512, config: MachineConfig::default() };
        let both = network_cost(&net(vec![layer(a.clone(), fa), layer(b.clone(), fb)]), n_dsp).unwrap();
        let sep = network_cost(&net(vec![layer(a, fa)]), n_dsp).unwrap() + network_cost(&net(vec![layer(b, fb)]), n_dsp).unwrap();
        prop_assert_eq!(both, sep);
    }

    #[test]
    fn binary_search_never_beats_exhaustive(levels in prop::collection::vec(1u64..3000, 1..20), n_dsp_max in 1u64..1500) {
        let net = NetworkSpec {
            layers: vec![LayerSpec {
                name: String::new(),
                n_filter: 3,
                stats: FilterStats { gates_per_level: levels, n_fanin: 48, n_po: 8, n_input_vectors: 1 },
            }],
            n_parallel_factor: 2,
            n_dsp_max,
            config: MachineConfig::default(),
        };
        let ex = optimize_dsp(&net, "exhaustive").unwrap();
        let bin = optimize_dsp(&net, "binary").unwrap();
        prop_assert!(ex.cycles <= bin.cycles);
        prop_assert_eq!(network_cost(&net, ex.n_dsp).unwrap(), ex.cycles);
    }
}
