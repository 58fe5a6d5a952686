// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each test prints one `PASS`/`FAIL` line straight to
//! stdout so the summary shows up without `--nocapture`.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffcl_core::config::MachineConfig;
use ffcl_core::cost::{total_cost, WorkloadStats};
use ffcl_core::netlist::{parse_netlist, random_netlist, GateNetlist, ReferenceEvaluator};
use ffcl_core::optimize::{optimize_dsp, FilterStats, LayerSpec, NetworkSpec};
use ffcl_core::schedule::{compile, levelize, partition, KernelProgram, Opcode, SlotKind};
use ffcl_core::sim::{simulate_vectors, BatchInput};
use ffcl_core::verify::{generate_vectors, verify_program, VectorSource};
use ffcl_core::GateOp;

const G1: &str = include_str!("fixtures/g1.v");
const G2: &str = include_str!("fixtures/g2.v");

fn criterion(id: u32, title: &str, limit: Duration, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = body();
    let took = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if took <= limit => Ok(detail),
        Ok(detail) => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
        Err(e) => Err(e),
    };
    let line = match &outcome {
        Ok(detail) => format!("criterion {id:>2} PASS  {title} ({took:.2?}): {detail}\n"),
        Err(e) => format!("criterion {id:>2} FAIL  {title} ({took:.2?}): {e}\n"),
    };
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    if let Err(e) = outcome {
        panic!("criterion {id}: {e}");
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compile_fixture(src: &str, n_dsp: usize) -> (GateNetlist, KernelProgram) {
    let n = parse_netlist(src).expect("fixture parses");
    let p = compile(&n, &MachineConfig::with_dsp(n_dsp)).expect("fixture compiles");
    (n, p)
}

#[test]
fn c01_golden_layout() {
    criterion(1, "golden buffer layout and rows for g1", Duration::from_secs(1), || {
        let (_, p) = compile_fixture(G1, 2);
        let nets: Vec<&str> = p.buffer.iter().map(|s| s.net.as_str()).collect();
        check(nets == ["1'b0", "1'b1", "a", "b", "c", "d", "w1", "w2", "out"], || format!("layout {nets:?}"))?;
        let kinds: Vec<SlotKind> = p.buffer.iter().map(|s| s.kind).collect();
        check(kinds[0] == SlotKind::Const0 && kinds[1] == SlotKind::Const1 && kinds[8] == SlotKind::Output, || {
            format!("kinds {kinds:?}")
        })?;
        let rows: Vec<(Vec<u32>, Vec<u32>, Vec<Opcode>)> =
            p.subkernels.iter().map(|s| (s.in_addrs.clone(), s.out_addrs.clone(), s.opcodes.clone())).collect();
        let want = vec![
            (vec![2, 3, 4, 5], vec![6, 7], vec![Opcode::And, Opcode::And]),
            (vec![6, 7, 0, 0], vec![8, 0], vec![Opcode::And, Opcode::Nop]),
        ];
        check(rows == want, || format!("rows {rows:?}"))?;
        Ok("9 slots, 2 sub-kernels bit-exact".into())
    });
}

#[test]
fn c02_subkernel_counts() {
    criterion(2, "g1 and g2 sub-kernel counts at n_dsp=2", Duration::from_secs(1), || {
        let (_, p1) = compile_fixture(G1, 2);
        let (_, p2) = compile_fixture(G2, 2);
        check((p1.n_subkernels(), p2.n_subkernels()) == (2, 4), || {
            format!("got {} and {}", p1.n_subkernels(), p2.n_subkernels())
        })?;
        Ok("2 and 4".into())
    });
}

#[test]
fn c03_partition_example() {
    criterion(3, "2600-gate level at n_dsp=1000", Duration::from_secs(1), || {
        let names: Vec<String> = (0..2601).map(|i| format!("i{i}")).collect();
        let gates = (0..2600)
            .map(|g| ffcl_core::netlist::Gate::new(format!("g{g}"), GateOp::And, &[&names[g], &names[g + 1]]))
            .collect();
        let outs: Vec<String> = (0..2600).map(|g| format!("g{g}")).collect();
        let n = GateNetlist::new("wide", names.clone(), outs, gates).map_err(|e| e.to_string())?;
        let ln = levelize(&n);
        check(ln.gates_per_level() == [2600], || format!("levels {:?}", ln.gates_per_level()))?;
        let slices = partition(&ln, 1000);
        let sizes: Vec<usize> = slices.iter().map(|s| s.gates.len()).collect();
        check(sizes == [1000, 1000, 600], || format!("slices {sizes:?}"))?;
        let mut cfg = MachineConfig::with_dsp(1000);
        cfg.addr_width = 14;
        let p = compile(&n, &cfg).map_err(|e| e.to_string())?;
        check(p.n_subkernels() == 3, || format!("compiled {}", p.n_subkernels()))?;
        Ok("3 sub-kernels (1000, 1000, 600)".into())
    });
}

#[test]
fn c04_packing_ratios() {
    criterion(4, "packing ratios for 512/14/48/6", Duration::from_secs(1), || {
        let c = MachineConfig::default();
        check((c.axi_width, c.addr_width, c.lane_width, c.opcode_width) == (512, 14, 48, 6), || {
            "defaults changed".into()
        })?;
        let got = (c.lambda(), c.delta(), c.zeta());
        check(got == (36, 10, 85), || format!("got {got:?}"))?;
        Ok("lambda=36 delta=10 zeta=85".into())
    });
}

const ORACLE_DSPS: [usize; 5] = [1, 2, 7, 48, 1000];

#[test]
fn c05_oracle_equivalence() {
    criterion(5, "1000 random netlists against the scalar oracle", Duration::from_secs(120), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        let mut ops = BTreeSet::new();
        let (mut checked, mut compiled) = (0u64, 0u64);
        for i in 0..1000u64 {
            let n_pi = rng.gen_range(4..=16);
            let n_gates = rng.gen_range(5..=2000);
            let n_po = rng.gen_range(1..=n_gates.min(16));
            let n = random_netlist(rng.gen(), n_pi, n_gates, n_po);
            ops.extend(n.gates().iter().map(|g| g.op));
            let source =
                if n_pi <= 12 { VectorSource::Exhaustive } else { VectorSource::Random { count: 10_000, seed: i } };
            let vectors = generate_vectors(n_pi, source).map_err(|e| e.to_string())?;
            let oracle = ReferenceEvaluator::new(&n);
            let expected: Vec<Vec<bool>> = vectors.iter().map(|v| oracle.eval_outputs(v)).collect();
            for &n_dsp in &ORACLE_DSPS {
                let p = compile(&n, &MachineConfig::with_dsp(n_dsp)).map_err(|e| e.to_string())?;
                let r = simulate_vectors(&p, &vectors).map_err(|e| format!("netlist {i} n_dsp {n_dsp}: {e}"))?;
                if let Some(j) = (0..vectors.len()).find(|&j| r.vector(j) != expected[j]) {
                    return Err(format!("netlist {i} (seeded) n_dsp {n_dsp}: mismatch on vector {j}"));
                }
                compiled += 1;
            }
            checked += vectors.len() as u64;
        }
        check(ops.len() == 8, || format!("only {} gate kinds exercised", ops.len()))?;
        Ok(format!("{compiled} programs, {checked} vectors per DSP count, 0 mismatches"))
    });
}

#[test]
fn c06_model_matches_simulator() {
    criterion(6, "cost model equals simulator tallies on 200 pairs", Duration::from_secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        for i in 0..200 {
            let n_pi = rng.gen_range(1..=40);
            let n_gates = rng.gen_range(1..=1500);
            let n = random_netlist(rng.gen(), n_pi, n_gates, rng.gen_range(1..=n_gates.min(64)));
            let cfg = MachineConfig {
                n_dsp: [1, 2, 3, 7, 48, 100, 1000][rng.gen_range(0..7)],
                lane_width: rng.gen_range(1..=64),
                axi_width: [128, 256, 512, 1024][rng.gen_range(0..4)],
                addr_width: rng.gen_range(12..=16),
                opcode_width: rng.gen_range(4..=8),
                k_ddr_banks: rng.gen_range(2..=8),
                n_exe_logic_ops: rng.gen_range(1..=3),
            };
            let p = compile(&n, &cfg).map_err(|e| format!("pair {i}: {e}"))?;
            let n_vectors: usize = rng.gen_range(1..=300);
            let vectors: Vec<Vec<bool>> = (0..n_vectors).map(|_| (0..n_pi).map(|_| rng.gen()).collect()).collect();
            let sim = simulate_vectors(&p, &vectors).map_err(|e| e.to_string())?;
            let batches = n_vectors.div_ceil(cfg.lane_width as usize) as u64;
            let model = total_cost(&WorkloadStats::from_program(&p, batches, 1), &cfg).map_err(|e| e.to_string())?;
            let t = &sim.tally;
            let pairs = [
                ("n_copy_mem_in", model.n_copy_mem_in, t.n_copy_mem_in),
                ("n_loop_subkernels", model.n_loop_subkernels, t.n_loop_subkernels),
                ("n_outputs", model.n_outputs, t.n_outputs),
                ("n_compute", model.n_compute, t.n_compute),
            ];
            for (name, m, s) in pairs {
                check(m == s, || format!("pair {i} {name}: model {m}, simulator {s}"))?;
            }
        }
        Ok("4 fields x 200 pairs exact".into())
    });
}

fn deep_filter() -> FilterStats {
    const WIDTHS: [u64; 10] = [50, 3000, 400, 1200, 90, 2500, 700, 150, 1800, 60];
    FilterStats {
        gates_per_level: (0..24).map(|i| WIDTHS[i % WIDTHS.len()]).collect(),
        n_fanin: 64,
        n_po: 10,
        n_input_vectors: 1,
    }
}

#[test]
fn c07_interior_minimum() {
    criterion(7, "deep workload has an interior n_dsp optimum", Duration::from_secs(30), || {
        let cfg = MachineConfig::default();
        let stats = deep_filter();
        let cost = |n: u64| total_cost(&stats.at_dsp(n), &cfg).map(|c| c.n_cc_opt).map_err(|e| e.to_string());
        let mut sweep = Vec::with_capacity(4096);
        for n in 1..=4096 {
            sweep.push((cost(n)?, n));
        }
        let (best, arg) = *sweep.iter().min().unwrap();
        let (c16, c4096) = (cost(16)?, cost(4096)?);
        check(best < c16 && best < c4096, || format!("min {best} at {arg}, c16 {c16}, c4096 {c4096}"))?;
        let net = NetworkSpec {
            layers: vec![LayerSpec { name: "deep".into(), n_filter: 1, stats }],
            n_parallel_factor: 1,
            n_dsp_max: 4096,
            config: cfg,
        };
        let opt = optimize_dsp(&net, "exhaustive").map_err(|e| e.to_string())?;
        check(opt.n_dsp == arg && opt.cycles == best, || format!("optimizer {opt:?}, sweep ({arg}, {best})"))?;
        Ok(format!("argmin {arg} -> {best} cycles; 16 -> {c16}, 4096 -> {c4096}"))
    });
}

fn random_network(rng: &mut ChaCha8Rng) -> NetworkSpec {
    let layers = (0..rng.gen_range(1..=4))
        .map(|l| LayerSpec {
            name: format!("layer{l}"),
            n_filter: rng.gen_range(1..=64),
            stats: FilterStats {
                gates_per_level: (0..rng.gen_range(1..=30)).map(|_| rng.gen_range(1..=3000)).collect(),
                n_fanin: rng.gen_range(1..=512),
                n_po: rng.gen_range(1..=64),
                n_input_vectors: rng.gen_range(1..=8),
            },
        })
        .collect();
    NetworkSpec {
        layers,
        n_parallel_factor: rng.gen_range(1..=8),
        n_dsp_max: rng.gen_range(1..=2048),
        config: MachineConfig::default(),
    }
}

#[test]
fn c08_optimizer_oracle() {
    criterion(8, "exhaustive search equals full scan on 50 networks", Duration::from_secs(120), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
        let (mut worst_gap, mut exact) = (0f64, 0);
        for i in 0..50 {
            let net = random_network(&mut rng);
            let ex = optimize_dsp(&net, "exhaustive").map_err(|e| e.to_string())?;
            let full = optimize_dsp(&net, "full-scan").map_err(|e| e.to_string())?;
            check((ex.n_dsp, ex.cycles) == (full.n_dsp, full.cycles), || {
                format!("network {i}: exhaustive {ex:?}, full scan {full:?}")
            })?;
            let bin = optimize_dsp(&net, "binary").map_err(|e| e.to_string())?;
            check(bin.cycles >= full.cycles, || format!("network {i}: binary {bin:?} beats optimum {full:?}"))?;
            if bin.cycles == full.cycles {
                exact += 1;
            }
            worst_gap = worst_gap.max(bin.cycles as f64 / full.cycles as f64 - 1.0);
        }
        Ok(format!("50/50 identical; binary optimal on {exact}/50, worst gap {:.2}%", worst_gap * 100.0))
    });
}

#[test]
fn c09_serialization() {
    criterion(9, "program JSON round trip and range check", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
        let mut last = None;
        for i in 0..100 {
            let n_gates = rng.gen_range(1..=800);
            let n = random_netlist(rng.gen(), rng.gen_range(1..=32), n_gates, rng.gen_range(1..=n_gates.min(32)));
            let p = compile(&n, &MachineConfig::with_dsp(rng.gen_range(1..=64))).map_err(|e| e.to_string())?;
            let back = KernelProgram::from_json(&p.to_json()).map_err(|e| format!("program {i}: {e}"))?;
            check(back == p, || format!("program {i} changed in round trip"))?;
            last = Some(p);
        }
        let mut p = last.unwrap();
        p.subkernels[0].out_addrs[0] = 1 << 14;
        check(KernelProgram::from_json(&p.to_json()).is_err(), || "out-of-range address accepted".into())?;
        Ok("100 identical, address 16384 rejected".into())
    });
}

/// Value each slot reads for every vector, according to the scalar oracle.
fn slot_values(n: &GateNetlist, p: &KernelProgram, vectors: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let oracle = ReferenceEvaluator::new(n);
    let nets = oracle.net_names();
    let per_vector: Vec<Vec<bool>> = vectors.iter().map(|v| oracle.eval_nets(v)).collect();
    p.buffer
        .iter()
        .map(|slot| match slot.kind {
            SlotKind::Const0 => vec![false; vectors.len()],
            SlotKind::Const1 => vec![true; vectors.len()],
            _ => {
                let k = nets.iter().position(|x| *x == slot.net).unwrap();
                per_vector.iter().map(|vals| vals[k]).collect()
            }
        })
        .collect()
}

/// Scalar evaluation of every output with net `forced` pinned to `values`.
fn eval_forced(n: &GateNetlist, vectors: &[Vec<bool>], forced: &str, values: &[bool]) -> Vec<Vec<bool>> {
    vectors
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut nets: std::collections::HashMap<&str, bool> =
                n.primary_inputs().iter().map(String::as_str).zip(v.iter().copied()).collect();
            for &g in n.topo_order() {
                let gate = &n.gates()[g];
                let val = if gate.output == forced {
                    values[j]
                } else {
                    let a = gate.operands.first().is_some_and(|o| nets[o.as_str()]);
                    let b = gate.operands.get(1).is_some_and(|o| nets[o.as_str()]);
                    gate.op.eval_bit(a, b)
                };
                nets.insert(&gate.output, val);
            }
            n.primary_outputs().iter().map(|o| nets[o.as_str()]).collect()
        })
        .collect()
}

#[test]
fn c10_fault_injection() {
    criterion(10, "single opcode/address faults in g1 and g2 are caught", Duration::from_secs(10), || {
        let mut summary = Vec::new();
        for (name, src) in [("g1", G1), ("g2", G2)] {
            let (n, p) = compile_fixture(src, 2);
            let vectors = generate_vectors(n.primary_inputs().len(), VectorSource::Exhaustive).unwrap();
            check(verify_program(&n, &p, &vectors).passed(), || format!("{name}: clean program fails"))?;
            let values = slot_values(&n, &p, &vectors);
            let (mut op_caught, mut op_equiv, mut op_masked, mut addr_caught, mut addr_equiv) = (0, 0, 0, 0, 0);

            for (t, sk) in p.subkernels.iter().enumerate() {
                for slot in 0..sk.opcodes.len() {
                    for &op in Opcode::ALL.iter().filter(|&&o| o != sk.opcodes[slot]) {
                        let mut bad = p.clone();
                        bad.subkernels[t].opcodes[slot] = op;
                        let fails = !verify_program(&n, &bad, &vectors).passed();
                        // The swap must be caught whenever it changes some
                        // output. Excited but masked swaps are counted apart.
                        let (excited, observable) = match (sk.opcodes[slot].gate_op(), op.gate_op()) {
                            (Some(old), Some(new)) => {
                                let a = &values[sk.in_addrs[2 * slot] as usize];
                                let b = &values[sk.in_addrs[2 * slot + 1] as usize];
                                let forced: Vec<bool> = a.iter().zip(b).map(|(&x, &y)| new.eval_bit(x, y)).collect();
                                let excited = a.iter().zip(b).any(|(&x, &y)| old.eval_bit(x, y) != new.eval_bit(x, y));
                                let net = &p.buffer[sk.out_addrs[slot] as usize].net;
                                (excited, eval_forced(&n, &vectors, net, &forced) != eval_forced(&n, &vectors, "", &[]))
                            }
                            _ => (true, true),
                        };
                        if excited && !observable {
                            op_masked += 1;
                        }
                        let differs = observable;
                        if differs {
                            check(fails, || format!("{name}: sub-kernel {t} slot {slot} -> {op:?} not caught"))?;
                            op_caught += 1;
                        } else {
                            op_equiv += 1;
                        }
                    }
                }
                let rows = [(false, sk.in_addrs.len()), (true, sk.out_addrs.len())];
                for (is_out, len) in rows {
                    for k in 0..len {
                        let orig = if is_out { sk.out_addrs[k] } else { sk.in_addrs[k] };
                        let replacements: BTreeSet<u32> = (0..p.buffer_size() as u32)
                            .chain((0..p.config.addr_width).map(|b| orig ^ (1 << b)))
                            .filter(|&a| a != orig)
                            .collect();
                        for a in replacements {
                            let mut bad = p.clone();
                            let row = &mut bad.subkernels[t];
                            if is_out {
                                row.out_addrs[k] = a;
                            } else {
                                row.in_addrs[k] = a;
                            }
                            let fails = !verify_program(&n, &bad, &vectors).passed();
                            // A structurally legal read redirection only has to
                            // be caught when it changes some output.
                            let observable = bad.validate().is_err() || {
                                let slot = k / 2;
                                let row = &bad.subkernels[t];
                                let gate = row.opcodes[slot].gate_op().unwrap();
                                let x = &values[row.in_addrs[2 * slot] as usize];
                                let y = &values[row.in_addrs[2 * slot + 1] as usize];
                                let forced: Vec<bool> = x.iter().zip(y).map(|(&u, &v)| gate.eval_bit(u, v)).collect();
                                let net = &p.buffer[row.out_addrs[slot] as usize].net;
                                eval_forced(&n, &vectors, net, &forced) != eval_forced(&n, &vectors, "", &[])
                            };
                            if observable {
                                check(fails, || {
                                    let which = if is_out { "out" } else { "in" };
                                    format!("{name}: sub-kernel {t} {which}[{k}] {orig} -> {a} not caught")
                                })?;
                                addr_caught += 1;
                            } else {
                                addr_equiv += 1;
                            }
                        }
                    }
                }
            }
            summary.push(format!(
                "{name}: {op_caught} opcode and {addr_caught} address faults caught, \
                 {op_equiv} opcode swaps equivalent ({op_masked} of them excited but masked), {addr_equiv} address faults equivalent"
            ));
        }
        Ok(summary.join("; "))
    });
}

#[test]
fn batch_input_rejects_width_mismatch() {
    // Guards the harness itself: a program fed the wrong inputs must not pass.
    let (_, p) = compile_fixture(G1, 2);
    let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    assert!(BatchInput::from_vectors(names, &[vec![true, true]]).is_err());
    assert!(simulate_vectors(&p, &[vec![true; 3]]).is_err());
}
