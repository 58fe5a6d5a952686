// SPDX-License-Identifier: Apache-2.0

//! Text formats: input/output vector files, workload stats, network specs
//! and flat key/value reports.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::config::MachineConfig;
use crate::cost::WorkloadStats;
use crate::optimize::{FilterStats, LayerSpec, NetworkSpec};
use crate::schedule::{KernelProgram, ProgramError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Vector { line: usize, msg: String },
    #[error("workload stats: {0}")]
    Stats(String),
    #[error("network spec: {0}")]
    Network(String),
    #[error("program {path}: {source}")]
    Program { path: PathBuf, source: ProgramError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One vector per non-empty line, `0`/`1` characters in port order.
pub fn parse_vectors(text: &str, width: usize) -> Result<Vec<Vec<bool>>, FormatError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let bits = line
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(FormatError::Vector { line: i + 1, msg: format!("unexpected character `{other}`") }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if bits.len() != width {
            return Err(FormatError::Vector {
                line: i + 1,
                msg: format!("expected {width} bits, found {}", bits.len()),
            });
        }
        out.push(bits);
    }
    Ok(out)
}

pub fn format_vectors(vectors: &[Vec<bool>]) -> String {
    let mut s = String::new();
    for v in vectors {
        s.extend(v.iter().map(|&b| if b { '1' } else { '0' }));
        s.push('\n');
    }
    s
}

/// TOML key/value workload, e.g. `gates_per_level = [2, 1]`.
pub fn parse_workload(text: &str) -> Result<WorkloadStats, FormatError> {
    toml::from_str(text).map_err(|e| FormatError::Stats(e.to_string()))
}

/// `key = value` lines.
pub fn format_report<K: Display, V: Display>(fields: impl IntoIterator<Item = (K, V)>) -> String {
    let mut s = String::new();
    for (k, v) in fields {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    layers: Vec<LayerDoc>,
    #[serde(default = "one")]
    n_parallel_factor: u64,
    n_dsp_max: u64,
    #[serde(default)]
    config: Option<MachineConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    #[serde(default)]
    name: String,
    n_filter: u64,
    #[serde(default)]
    stats: Option<FilterStats>,
    /// Path of a compiled program, relative to the spec file.
    #[serde(default)]
    program: Option<PathBuf>,
    /// Packed batches per filter when the stats come from a program.
    #[serde(default)]
    n_input_vectors: Option<u64>,
}

fn one() -> u64 {
    1
}

/// Parses a JSON network spec. Layers give either inline `stats` or a
/// `program` path resolved against `base_dir`.
pub fn parse_network(text: &str, base_dir: &Path) -> Result<NetworkSpec, FormatError> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| FormatError::Network(e.to_string()))?;
    let layers = doc
        .layers
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let stats = match (l.stats, l.program) {
                (Some(s), None) => s,
                (None, Some(rel)) => {
                    let path = base_dir.join(rel);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|source| FormatError::Io { path: path.clone(), source })?;
                    let p = KernelProgram::from_json(&text).map_err(|source| FormatError::Program { path, source })?;
                    FilterStats {
                        gates_per_level: p.gates_per_level().into_iter().map(|g| g as u64).collect(),
                        n_fanin: p.n_fanin as u64,
                        n_po: p.n_po as u64,
                        n_input_vectors: l.n_input_vectors.unwrap_or(1),
                    }
                }
                _ => return Err(FormatError::Network(format!("layer {i} needs exactly one of `stats` or `program`"))),
            };
            Ok(LayerSpec { name: l.name, n_filter: l.n_filter, stats })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NetworkSpec {
        layers,
        n_parallel_factor: doc.n_parallel_factor,
        n_dsp_max: doc.n_dsp_max,
        config: doc.config.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip() {
        let v = parse_vectors("0101\n\n1111\n", 4).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(format_vectors(&v), "0101\n1111\n");
        assert!(matches!(parse_vectors("01x1", 4), Err(FormatError::Vector { line: 1, .. })));
        assert!(matches!(parse_vectors("1\n011", 1), Err(FormatError::Vector { line: 2, .. })));
    }

    #[test]
    fn workload_from_toml() {
        let w = parse_workload("n_dsp = 2\nn_fanin = 4\nn_po = 1\ngates_per_level = [2, 1]\n").unwrap();
        assert_eq!(w.subkernels().unwrap(), 2);
        assert_eq!((w.m, w.n_input_vectors), (1, 1));
        assert!(parse_workload("n_dsp = 2\nbogus = 1\n").is_err());
    }

    #[test]
    fn network_inline_stats() {
        let text = r#"{"n_dsp_max": 64, "layers": [
            {"name": "a", "n_filter": 2, "stats": {"gates_per_level": [2, 1], "n_fanin": 4, "n_po": 1, "n_input_vectors": 1}}
        ]}"#;
        let n = parse_network(text, Path::new(".")).unwrap();
        assert_eq!(n.n_parallel_factor, 1);
        assert_eq!(n.config, MachineConfig::default());
        let bad = r#"{"n_dsp_max": 64, "layers": [{"n_filter": 2}]}"#;
        assert!(parse_network(bad, Path::new(".")).is_err());
    }
}
