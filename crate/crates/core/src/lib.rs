//! Masked feedforward networks trained with dynamic connection synthesis and
//! constant-sparsity pruning, plus the tooling to run seeded experiment
//! sweeps over them and analyse the resulting structures.

pub mod analysis;
pub mod compression;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
