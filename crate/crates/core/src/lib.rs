//! NB-IoT uplink physical layer: transmitter models, channel impairments,
//! NPRACH / NPUSCH format 1 / NPUSCH format 2 receivers and a Monte Carlo
//! campaign harness.

pub mod channel;
pub mod coding;
pub mod config;
pub mod dsp;
pub mod error;
pub mod frontend;
pub mod grid;
pub mod harness;
pub mod nprach_rx;
pub mod npusch_f1_rx;
pub mod npusch_f2_rx;
pub mod numerology;
pub mod rng;
pub mod sequence;
pub mod threshold;
pub mod tx;

pub use error::{Error, Result};
pub use grid::{ComplexGrid, C64};
