// SPDX-License-Identifier: Apache-2.0

//! Network-level cycle aggregation and DSP-count selection.

mod strategy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::MachineConfig;
use crate::cost::{total_cost, CostError, WorkloadStats};

pub use strategy::{
    breakpoints, optimize_dsp, BinarySearch, DspSearch, ExhaustiveBreakpoints, FullScan, SearchOutcome, SearchRegistry,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptimizeError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("n_dsp {n_dsp} outside 1..={max}")]
    DspOutOfRange { n_dsp: u64, max: u64 },
    #[error("invalid network spec: {0}")]
    Invalid(String),
    #[error("unknown search mode `{0}`")]
    UnknownMode(String),
}

/// Workload of one filter's FFCL, independent of the DSP count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterStats {
    pub gates_per_level: Vec<u64>,
    pub n_fanin: u64,
    pub n_po: u64,
    /// Packed input batches per filter application.
    pub n_input_vectors: u64,
}

impl FilterStats {
    pub fn at_dsp(&self, n_dsp: u64) -> WorkloadStats {
        WorkloadStats {
            n_subkernels: None,
            n_dsp,
            n_fanin: self.n_fanin,
            n_po: self.n_po,
            n_input_vectors: self.n_input_vectors,
            m: 1,
            gates_per_level: Some(self.gates_per_level.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(default)]
    pub name: String,
    pub n_filter: u64,
    pub stats: FilterStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
    pub n_parallel_factor: u64,
    /// DSP budget of the device.
    pub n_dsp_max: u64,
    /// Bus and bank widths; its `n_dsp` is ignored.
    #[serde(default)]
    pub config: MachineConfig,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.n_parallel_factor == 0 {
            return Err(OptimizeError::Invalid("n_parallel_factor must be at least 1".into()));
        }
        if self.n_dsp_max == 0 {
            return Err(OptimizeError::Invalid("n_dsp_max must be at least 1".into()));
        }
        if let Some(l) = self.layers.iter().find(|l| l.n_filter == 0) {
            return Err(OptimizeError::Invalid(format!("layer `{}` has no filters", l.name)));
        }
        if self.config.k_ddr_banks < 2 {
            return Err(CostError::DdrBanks(self.config.k_ddr_banks).into());
        }
        Ok(())
    }

    /// Per-filter stage cost of every layer at `n_dsp`.
    pub fn layer_costs(&self, n_dsp: u64) -> Result<Vec<u64>, OptimizeError> {
        if n_dsp == 0 || n_dsp > self.n_dsp_max {
            return Err(OptimizeError::DspOutOfRange { n_dsp, max: self.n_dsp_max });
        }
        self.layers.iter().map(|l| Ok(total_cost(&l.stats.at_dsp(n_dsp), &self.config)?.stage())).collect()
    }
}

/// Cycles for the whole network at `n_dsp`.
///
/// Layers run one after another; inside a layer the filters stream through
/// the double-buffered pipeline, so each layer pays its stage cost once per
/// filter plus one pipeline fill. Filter work is shared across
/// `n_parallel_factor` kernels.
pub fn network_cost(net: &NetworkSpec, n_dsp: u64) -> Result<u64, OptimizeError> {
    net.validate()?;
    let stages = net.layer_costs(n_dsp)?;
    let filter_work: u64 = net.layers.iter().zip(&stages).map(|(l, c)| l.n_filter * c).sum();
    let fill: u64 = stages.iter().sum();
    Ok(filter_work.div_ceil(net.n_parallel_factor) + fill)
}

/// `(n_dsp, cycles)` for every `n_dsp` in `range`.
pub fn network_sweep(
    net: &NetworkSpec,
    range: std::ops::RangeInclusive<u64>,
) -> Result<Vec<(u64, u64)>, OptimizeError> {
    range.map(|n| Ok((n, network_cost(net, n)?))).collect()
}
