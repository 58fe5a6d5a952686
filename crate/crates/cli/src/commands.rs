// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ffcl_core::config::MachineConfig;
use ffcl_core::cost::{total_cost, WorkloadStats};
use ffcl_core::io::{format_report, format_vectors, parse_network, parse_vectors, parse_workload, FormatError};
use ffcl_core::netlist::{parse_netlist, random_netlist, GateNetlist};
use ffcl_core::optimize::{network_sweep, optimize_dsp, SearchOutcome};
use ffcl_core::schedule::{compile, KernelProgram};
use ffcl_core::sim::simulate_vectors;
use ffcl_core::verify::{generate_vectors, verify_program, VectorSource};

use crate::{Command, ConfigFlags, Mode, WorkloadFlags};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Parse(String),
    Compile(String),
    Mismatch(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Compile(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Compile(m) | CliError::Mismatch(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io { path, source } => CliError::Io { path, source },
            other => CliError::Parse(other.to_string()),
        }
    }
}

fn compile_err(e: impl fmt::Display) -> CliError {
    CliError::Compile(e.to_string())
}

/// What a run consumed and produced, written with `--manifest`.
#[derive(Debug, Serialize)]
pub struct Record {
    command: &'static str,
    inputs: Vec<PathBuf>,
    overrides: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    exit_status: u8,
    artifacts: Vec<PathBuf>,
}

impl Record {
    pub fn new(cmd: &Command) -> Self {
        let flags = |c: &ConfigFlags| serde_json::to_value(c).unwrap_or_default();
        let (command, inputs, overrides, seed) = match cmd {
            Command::Compile { netlist, config, .. } => ("compile", vec![netlist.clone()], flags(config), None),
            Command::Simulate { program, inputs, vectors, seed, .. } => {
                let mut paths = vec![program.clone()];
                paths.extend(inputs.clone());
                ("simulate", paths, serde_json::Value::Null, vectors.map(|_| *seed))
            }
            Command::Verify { netlist, program, config, seed, .. } => {
                let mut paths = vec![netlist.clone()];
                paths.extend(program.clone());
                ("verify", paths, flags(config), Some(*seed))
            }
            Command::Cost { input, config, .. } => ("cost", vec![input.clone()], flags(config), None),
            Command::Sweep { input, config, .. } => ("sweep", vec![input.clone()], flags(config), None),
            Command::Optimize { spec, .. } => ("optimize", vec![spec.clone()], serde_json::Value::Null, None),
            Command::Gen { seed, .. } => ("gen", Vec::new(), serde_json::Value::Null, Some(*seed)),
        };
        Record { command, inputs, overrides, seed, exit_status: 0, artifacts: Vec::new() }
    }

    pub fn write(mut self, path: &Path, status: u8) -> std::io::Result<()> {
        self.exit_status = status;
        let mut text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(path, text)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_artifact(path: &Path, text: &str, record: &mut Record) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    record.artifacts.push(path.to_path_buf());
    Ok(())
}

fn print(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load_netlist(path: &Path) -> Result<GateNetlist, CliError> {
    parse_netlist(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<KernelProgram, CliError> {
    KernelProgram::from_json(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn run(cmd: &Command, record: &mut Record) -> Result<(), CliError> {
    match cmd {
        Command::Compile { netlist, config, out } => cmd_compile(netlist, config, out.as_deref(), record),
        Command::Simulate { program, inputs, vectors, seed, out } => {
            cmd_simulate(program, inputs.as_deref(), *vectors, *seed, out.as_deref(), record)
        }
        Command::Verify { netlist, program, config, exhaustive, vectors, seed } => {
            cmd_verify(netlist, program.as_deref(), config, *exhaustive, *vectors, *seed)
        }
        Command::Cost { input, config, workload, sweep, out } => {
            cmd_cost(input, config, workload, *sweep, out.as_deref(), record)
        }
        Command::Sweep { input, config, workload, sweep, out } => {
            cmd_cost(input, config, workload, Some(*sweep), out.as_deref(), record)
        }
        Command::Optimize { spec, mode, out } => cmd_optimize(spec, *mode, out.as_deref(), record),
        Command::Gen { seed, inputs, gates, outputs, out } => {
            cmd_gen(*seed, *inputs, *gates, *outputs, out.as_deref(), record)
        }
    }
}

fn cmd_compile(path: &Path, flags: &ConfigFlags, out: Option<&Path>, record: &mut Record) -> Result<(), CliError> {
    let netlist = load_netlist(path)?;
    let cfg = flags.apply(MachineConfig::default());
    let program = compile(&netlist, &cfg).map_err(compile_err)?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| path.with_extension("kp.json"));
    write_artifact(&out, &program.to_json(), record)?;
    print(&format_report([
        ("name", program.name.clone()),
        ("n_dsp", cfg.n_dsp.to_string()),
        ("n_subkernels", program.n_subkernels().to_string()),
        ("depth", program.depth().to_string()),
        ("buffer_size", program.buffer_size().to_string()),
        ("program", out.display().to_string()),
    ]));
    Ok(())
}

fn cmd_simulate(
    path: &Path,
    inputs: Option<&Path>,
    count: Option<usize>,
    seed: u64,
    out: Option<&Path>,
    record: &mut Record,
) -> Result<(), CliError> {
    let program = load_program(path)?;
    let n_pi = program.primary_inputs().count();
    let vectors = match (inputs, count) {
        (Some(p), _) => parse_vectors(&read(p)?, n_pi)?,
        (None, Some(n)) => generate_vectors(n_pi, VectorSource::Random { count: n, seed }).map_err(compile_err)?,
        (None, None) => return Err(CliError::Usage("simulate needs --inputs FILE or --vectors N".into())),
    };
    let result = simulate_vectors(&program, &vectors).map_err(compile_err)?;
    let outputs: Vec<Vec<bool>> = (0..vectors.len()).map(|j| result.vector(j)).collect();
    let mut report = format_report(result.tally.fields());
    match out {
        Some(p) => {
            write_artifact(p, &format_vectors(&outputs), record)?;
            report.push_str(&format!("outputs = {}\n", p.display()));
        }
        None => {
            report.push('\n');
            report.push_str(&format_vectors(&outputs));
        }
    }
    print(&report);
    Ok(())
}

fn cmd_verify(
    path: &Path,
    program_path: Option<&Path>,
    flags: &ConfigFlags,
    exhaustive: bool,
    count: Option<usize>,
    seed: u64,
) -> Result<(), CliError> {
    let netlist = load_netlist(path)?;
    let program = match program_path {
        // Structural problems in a supplied program are verification
        // failures, so only the JSON itself is checked here.
        Some(p) => serde_json::from_str::<KernelProgram>(&read(p)?)
            .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        None => compile(&netlist, &flags.apply(MachineConfig::default())).map_err(compile_err)?,
    };
    let n_pi = netlist.primary_inputs().len();
    let source = match (exhaustive, count) {
        (true, _) => VectorSource::Exhaustive,
        (false, Some(n)) => VectorSource::Random { count: n, seed },
        (false, None) if n_pi <= 12 => VectorSource::Exhaustive,
        (false, None) => VectorSource::Random { count: 10_000, seed },
    };
    let vectors = generate_vectors(n_pi, source).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = verify_program(&netlist, &program, &vectors);
    let lanes = program.config.lane_width.max(1) as usize;
    let mut text = format_report([
        ("vectors", report.vectors.to_string()),
        ("matched", report.matched().to_string()),
        ("mismatches", report.mismatch_count.to_string()),
    ]);
    if let Some(why) = &report.rejected {
        text.push_str(&format!("rejected = {why}\n"));
    }
    for m in &report.mismatches {
        text.push_str(&format!(
            "mismatch vector {} (batch {}, lane {}): inputs {} expected {} got {}\n",
            m.vector,
            m.vector / lanes,
            m.vector % lanes,
            format_vectors(std::slice::from_ref(&m.inputs)).trim_end(),
            format_vectors(std::slice::from_ref(&m.expected)).trim_end(),
            format_vectors(std::slice::from_ref(&m.got)).trim_end(),
        ));
    }
    let verdict = if report.passed() { "pass" } else { "fail" };
    text.push_str(&format!("result = {verdict} ({}/{})\n", report.matched(), report.vectors));
    print(&text);
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("{} of {} vectors differ", report.mismatch_count, report.vectors)))
    }
}

fn load_workload(
    path: &Path,
    flags: &ConfigFlags,
    wf: &WorkloadFlags,
) -> Result<(WorkloadStats, MachineConfig), CliError> {
    let text = read(path)?;
    let is_program = path.extension().is_some_and(|e| e == "json");
    let (mut w, cfg) = if is_program {
        let p = load_program(path)?;
        let w = WorkloadStats::from_program(&p, wf.batches.unwrap_or(1), 1);
        let cfg = flags.apply(p.config);
        (w, cfg)
    } else {
        if wf.batches.is_some() {
            return Err(CliError::Usage(
                "--batches applies to program input; set n_input_vectors in the stats file".into(),
            ));
        }
        (parse_workload(&text)?, flags.apply(MachineConfig::default()))
    };
    if let Some(m) = wf.m {
        w.m = m;
    }
    if let Some(n) = flags.n_dsp {
        w = w.at_dsp(n as u64);
    }
    Ok((w, cfg))
}

fn cmd_cost(
    path: &Path,
    flags: &ConfigFlags,
    wf: &WorkloadFlags,
    sweep: Option<(u64, u64)>,
    out: Option<&Path>,
    record: &mut Record,
) -> Result<(), CliError> {
    let (w, cfg) = load_workload(path, flags, wf)?;
    let Some((a, b)) = sweep else {
        let cost = total_cost(&w, &cfg).map_err(compile_err)?;
        print(&format_report(cost.fields()));
        return Ok(());
    };
    if w.gates_per_level.is_none() {
        return Err(CliError::Usage("sweeping needs gates_per_level in the workload".into()));
    }
    let mut csv = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Compile(e.to_string());
    csv.write_record(["n_dsp", "n_data_moves", "n_compute", "n_cc"]).map_err(io_err)?;
    let mut best: Option<(u64, u64)> = None;
    for n in a..=b {
        let c = total_cost(&w.at_dsp(n), &cfg).map_err(compile_err)?;
        csv.serialize((n, c.n_data_moves_opt, c.n_compute, c.n_cc_opt)).map_err(io_err)?;
        if best.is_none_or(|(cc, _)| c.n_cc_opt < cc) {
            best = Some((c.n_cc_opt, n));
        }
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Compile(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is UTF-8");
    match out {
        Some(p) => {
            write_artifact(p, &text, record)?;
            let (cc, n) = best.expect("non-empty range");
            print(&format_report([
                ("rows", (b - a + 1).to_string()),
                ("best_n_dsp", n.to_string()),
                ("best_n_cc", cc.to_string()),
                ("csv", p.display().to_string()),
            ]));
        }
        None => print(&text),
    }
    Ok(())
}

fn outcome_fields(prefix: &str, o: &SearchOutcome) -> Vec<(String, String)> {
    vec![
        (format!("{prefix}n_dsp"), o.n_dsp.to_string()),
        (format!("{prefix}cycles"), o.cycles.to_string()),
        (format!("{prefix}evaluations"), o.evaluations.to_string()),
    ]
}

fn cmd_optimize(path: &Path, mode: Mode, out: Option<&Path>, record: &mut Record) -> Result<(), CliError> {
    let base = path.parent().unwrap_or(Path::new("."));
    let net = parse_network(&read(path)?, base)?;
    let search = |name: &str| optimize_dsp(&net, name).map_err(compile_err);
    let fields = match mode {
        Mode::Exhaustive => outcome_fields("", &search("exhaustive")?),
        Mode::Binary => outcome_fields("", &search("binary")?),
        Mode::FullScan => outcome_fields("", &search("full-scan")?),
        Mode::Both => {
            let ex = search("exhaustive")?;
            let bin = search("binary")?;
            let gap = (bin.cycles - ex.cycles) as f64 / ex.cycles as f64 * 100.0;
            let mut f = outcome_fields("", &ex);
            f.extend(outcome_fields("binary_", &bin));
            f.push(("binary_gap_percent".into(), format!("{gap:.3}")));
            f
        }
    };
    if let Some(p) = out {
        let mut csv = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Compile(e.to_string());
        csv.write_record(["n_dsp", "cycles"]).map_err(err)?;
        for row in network_sweep(&net, 1..=net.n_dsp_max).map_err(compile_err)? {
            csv.serialize(row).map_err(err)?;
        }
        let bytes = csv.into_inner().map_err(|e| CliError::Compile(e.to_string()))?;
        write_artifact(p, &String::from_utf8(bytes).expect("csv output is UTF-8"), record)?;
    }
    print(&format_report(fields));
    Ok(())
}

fn cmd_gen(
    seed: u64,
    n_pi: usize,
    n_gates: usize,
    n_po: usize,
    out: Option<&Path>,
    record: &mut Record,
) -> Result<(), CliError> {
    if n_pi == 0 || n_po == 0 || n_gates < n_po {
        return Err(CliError::Usage("need --inputs >= 1 and 1 <= --outputs <= --gates".into()));
    }
    let text = random_netlist(seed, n_pi, n_gates, n_po).to_string();
    match out {
        Some(p) => write_artifact(p, &text, record),
        None => {
            print(&text);
            Ok(())
        }
    }
}
