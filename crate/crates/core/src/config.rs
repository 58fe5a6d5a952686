// SPDX-License-Identifier: Apache-2.0

//! Parameters of the abstract DSP-array machine.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("n_dsp must be at least 1")]
    NoDsp,
    #[error("lane width must be in 1..=64, got {0}")]
    LaneWidth(u32),
    #[error("address width must be in 1..=32, got {0}")]
    AddrWidth(u32),
    #[error("opcode width must be in 4..=32 to hold every opcode, got {0}")]
    OpcodeWidth(u32),
    #[error("bus width {axi} is narrower than a {what} of {width} bits")]
    Packing { what: &'static str, axi: u32, width: u32 },
    #[error("at least two DDR banks are required, got {0}")]
    DdrBanks(u32),
}

/// Machine shape. The bus-packing ratios are always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub n_dsp: usize,
    pub lane_width: u32,
    pub axi_width: u32,
    pub addr_width: u32,
    pub opcode_width: u32,
    pub k_ddr_banks: u32,
    pub n_exe_logic_ops: u64,
}

pub const DEFAULT_N_DSP: usize = 1000;

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            n_dsp: DEFAULT_N_DSP,
            lane_width: 48,
            axi_width: 512,
            addr_width: 14,
            opcode_width: 6,
            k_ddr_banks: 4,
            n_exe_logic_ops: 1,
        }
    }
}

impl MachineConfig {
    pub fn with_dsp(n_dsp: usize) -> Self {
        MachineConfig { n_dsp, ..Default::default() }
    }

    /// Addresses per bus beat.
    pub fn lambda(&self) -> u64 {
        (self.axi_width / self.addr_width) as u64
    }

    /// Data words per bus beat.
    pub fn delta(&self) -> u64 {
        (self.axi_width / self.lane_width) as u64
    }

    /// Opcodes per bus beat.
    pub fn zeta(&self) -> u64 {
        (self.axi_width / self.opcode_width) as u64
    }

    /// Number of addressable data-buffer slots.
    pub fn address_space(&self) -> u64 {
        1u64 << self.addr_width
    }

    /// Mask selecting the live lanes of a machine word.
    pub fn lane_mask(&self) -> u64 {
        if self.lane_width == 64 {
            !0
        } else {
            (1u64 << self.lane_width) - 1
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_dsp == 0 {
            return Err(ConfigError::NoDsp);
        }
        if !(1..=64).contains(&self.lane_width) {
            return Err(ConfigError::LaneWidth(self.lane_width));
        }
        if !(1..=32).contains(&self.addr_width) {
            return Err(ConfigError::AddrWidth(self.addr_width));
        }
        if !(4..=32).contains(&self.opcode_width) {
            return Err(ConfigError::OpcodeWidth(self.opcode_width));
        }
        for (what, width) in
            [("data word", self.lane_width), ("address", self.addr_width), ("opcode", self.opcode_width)]
        {
            if self.axi_width < width {
                return Err(ConfigError::Packing { what, axi: self.axi_width, width });
            }
        }
        if self.k_ddr_banks < 2 {
            return Err(ConfigError::DdrBanks(self.k_ddr_banks));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_packing_ratios() {
        let c = MachineConfig::default();
        assert_eq!((c.lambda(), c.delta(), c.zeta()), (36, 10, 85));
        assert_eq!(c.address_space(), 16384);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_shapes() {
        let base = MachineConfig::default();
        assert_eq!(MachineConfig { n_dsp: 0, ..base }.validate(), Err(ConfigError::NoDsp));
        assert_eq!(MachineConfig { k_ddr_banks: 1, ..base }.validate(), Err(ConfigError::DdrBanks(1)));
        assert_eq!(MachineConfig { lane_width: 65, ..base }.validate(), Err(ConfigError::LaneWidth(65)));
        assert!(matches!(MachineConfig { axi_width: 32, ..base }.validate(), Err(ConfigError::Packing { .. })));
        assert_eq!(MachineConfig { opcode_width: 3, ..base }.validate(), Err(ConfigError::OpcodeWidth(3)));
    }

    #[test]
    fn lane_mask_widths() {
        assert_eq!(MachineConfig::default().lane_mask(), (1 << 48) - 1);
        assert_eq!(MachineConfig { lane_width: 64, ..Default::default() }.lane_mask(), !0);
    }
}
