//! Pulsed degenerate parametric squeezing in a lossy microring resonator.
//!
//! A Gaussian pump pulse drives a ring that is resonant at both the pump and
//! the half-frequency signal. The crate computes the in-ring pump gain, the
//! thermal-squeezed-state dynamics of the signal mode, the output noise
//! spectrum seen by a homodyne detector, and parameter sweeps over all of it.

pub mod dynamics;
pub mod error;
pub mod export;
pub mod figures;
pub mod ode;
pub mod params;
pub mod pump;
pub mod special;
pub mod spectrum;
pub mod sweep;

pub use error::*;
pub use params::{derive_run, DimensionlessRun, Knobs, PhysicalConfig};
pub use pump::{Drive, PumpEnvelope};
