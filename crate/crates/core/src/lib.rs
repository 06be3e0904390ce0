//! Detection-chain model for a quantum-parametric-mode-sorting LIDAR.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the companion `qpms` crate.

#![no_std]
// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atmosphere;
pub mod beam_optics;
pub mod constants;
pub mod detection;
pub mod error;
pub mod hg_modes;
pub mod radiometry;
pub mod sfg_stats;

pub use error::{Error, Result};
