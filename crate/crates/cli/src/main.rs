// SPDX-License-Identifier: Apache-2.0

//! `ffcl`: compile gate-level netlists for the DSP array, simulate and verify
//! them, and run the cycle model.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ffcl_core::config::MachineConfig;

#[derive(Debug, Parser)]
#[command(name = "ffcl", version, about = "Map combinational logic onto DSP blocks and model its cycle cost")]
struct Cli {
    /// Write a JSON record of this run (inputs, overrides, seed, exit status, outputs).
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a netlist into a kernel program (`.kp.json`).
    Compile {
        netlist: PathBuf,
        #[command(flatten)]
        config: ConfigFlags,
        /// Output path; defaults to the netlist path with a `.kp.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a compiled program on input vectors.
    Simulate {
        program: PathBuf,
        /// File with one `0`/`1` line per vector, in input port order.
        #[arg(long, conflicts_with = "vectors")]
        inputs: Option<PathBuf>,
        /// Number of random vectors to draw instead of reading `--inputs`.
        #[arg(long)]
        vectors: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write output vectors; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile (or load) a program and check it against direct netlist evaluation.
    Verify {
        netlist: PathBuf,
        /// Check this program instead of compiling the netlist.
        #[arg(long)]
        program: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigFlags,
        /// Enumerate all input combinations (at most 20 inputs).
        #[arg(long, conflicts_with = "vectors")]
        exhaustive: bool,
        /// Number of seeded random vectors.
        #[arg(long)]
        vectors: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cycle estimate for a program or a TOML workload description.
    Cost {
        input: PathBuf,
        #[command(flatten)]
        config: ConfigFlags,
        #[command(flatten)]
        workload: WorkloadFlags,
        /// Sweep n_dsp over `A..B` (inclusive) and emit CSV.
        #[arg(long, value_name = "A..B", value_parser = parse_range)]
        sweep: Option<(u64, u64)>,
        /// CSV destination for `--sweep`; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as `cost --sweep`.
    Sweep {
        input: PathBuf,
        #[command(flatten)]
        config: ConfigFlags,
        #[command(flatten)]
        workload: WorkloadFlags,
        #[arg(long, value_name = "A..B", value_parser = parse_range)]
        sweep: (u64, u64),
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose the DSP count for a JSON network spec.
    Optimize {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Also write the per-n_dsp network cost as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a seeded random netlist as Verilog.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        inputs: usize,
        #[arg(long, default_value_t = 100)]
        gates: usize,
        #[arg(long, default_value_t = 4)]
        outputs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Binary,
    FullScan,
    /// Exhaustive and binary, with the gap between them.
    Both,
}

/// Machine parameter overrides; unset flags keep the defaults.
#[derive(Debug, Clone, Default, Args, Serialize)]
struct ConfigFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_dsp: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lane_width: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    axi_width: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    addr_width: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    opcode_width: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ddr_banks: Option<u32>,
    /// Cycles per DSP logic operation.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    exe_cycles: Option<u64>,
}

impl ConfigFlags {
    fn apply(&self, mut c: MachineConfig) -> MachineConfig {
        if let Some(v) = self.n_dsp {
            c.n_dsp = v;
        }
        if let Some(v) = self.lane_width {
            c.lane_width = v;
        }
        if let Some(v) = self.axi_width {
            c.axi_width = v;
        }
        if let Some(v) = self.addr_width {
            c.addr_width = v;
        }
        if let Some(v) = self.opcode_width {
            c.opcode_width = v;
        }
        if let Some(v) = self.ddr_banks {
            c.k_ddr_banks = v;
        }
        if let Some(v) = self.exe_cycles {
            c.n_exe_logic_ops = v;
        }
        c
    }
}

#[derive(Debug, Clone, Args)]
struct WorkloadFlags {
    /// Number of FFCL invocations pipelined back to back.
    #[arg(long)]
    m: Option<u64>,
    /// Packed input batches per invocation (program input only).
    #[arg(long)]
    batches: Option<u64>,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad range end `{b}`"))?;
    if a == 0 || a > b {
        return Err(format!("range {a}..{b} must satisfy 1 <= A <= B"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut record = commands::Record::new(&cli.command);
    let status = match commands::run(&cli.command, &mut record) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    };
    if let Some(path) = &cli.manifest {
        if let Err(e) = record.write(path, status) {
            eprintln!("error: writing manifest {}: {e}", path.display());
            return ExitCode::from(if status == 0 { 1 } else { status });
        }
    }
    ExitCode::from(status)
}
