//! Single-excitation dynamics of spin networks built by coupling uniform
//! chains through a unitary transform, with three applications on the
//! six-site network (routing, entanglement generation, phase sensing) and a
//! reproducible static-disorder Monte Carlo harness.

pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod network;
pub mod protocols;
pub mod rng;

pub use error::{Error, Result};
