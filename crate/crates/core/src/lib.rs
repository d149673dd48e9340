//! Edge-by-edge sampling of symmetric Gibbs distributions on sparse factor graphs.
//!
//! The sampler inserts factors one at a time in a random order and, after each insertion,
//! repairs the current configuration with a disagreement-propagation process. Every
//! process can fail; failure is kept as an explicit outcome so that output laws can be
//! compared exactly with the Gibbs distribution on small instances.

pub mod census;
pub mod decide;
pub mod dp;
pub mod error;
pub mod exact;
pub mod graph;
pub mod harness;
pub mod instances;
pub mod models;
pub mod process;
pub mod sampler;

pub use error::{Error, Result};
