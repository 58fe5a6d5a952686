// SPDX-License-Identifier: Apache-2.0

//! Maps fixed-function combinational logic onto an array of DSP blocks used
//! as wide SIMD logic units.
//!
//! The pipeline is: [`netlist::parse_netlist`] → [`schedule::compile`]
//! (levelize, split levels into DSP-sized sub-kernels, assign buffer
//! addresses and opcodes) → [`sim::simulate`] on the abstract machine. The
//! [`cost`] module predicts cycle counts in closed form, and [`optimize`]
//! picks a DSP count for a whole network of such circuits.

pub mod config;
pub mod cost;
pub mod io;
pub mod netlist;
pub mod optimize;
pub mod schedule;
pub mod sim;
pub mod verify;

pub use config::MachineConfig;
pub use netlist::{GateNetlist, GateOp};
pub use schedule::{compile, KernelProgram};
