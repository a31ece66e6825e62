//! Quasi-hole partition functions of the lowest Landau level, the emergent
//! gauge and scalar potentials they induce on tracer particles, and
//! independent numerical oracles for all of it.

pub mod error;
pub mod kernel;
pub mod numeric;
pub mod par;

pub use error::{Error, Result};
pub mod partition;
pub mod regime;
pub mod potentials;
pub mod oracle;
pub mod harness;
