//! Core algorithms for simulating coupled opinion/action dynamics on social
//! graphs, certifying Schur stability of the action dynamics, and redesigning
//! graph topologies with a genetic algorithm.
//!
//! The crate is `no_std` (alloc only); IO, file formats and the CLI live in
//! the companion `netstab` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod designer;
pub mod dynamics;
pub mod error;
pub mod netgraph;
pub mod numerics;
pub mod rng;
pub mod stability;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
