//! Simulator for single-photon time-bin computation in a programmable fiber
//! loop: state model, loop primitives, a circuit compiler, a compiled
//! Shor-15 pipeline, and a detector Monte-Carlo.

pub mod cli;
pub mod compiler;
pub mod config;
pub mod detection;
pub mod error;
pub mod primitives;
pub mod shor;
pub mod state;

pub use error::{Error, Result};
