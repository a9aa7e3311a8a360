//! Weighted random connection models on α-determinantal vertex processes.
//!
//! The crate covers the full pipeline: configuration, vertex-process
//! samplers, edge sampling, graph functionals, the partition combinatorics
//! behind cumulant expansions, closed-form bound constants and a Monte Carlo
//! harness for checking them.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod error;
pub mod fft;
pub mod functionals;
pub mod graph;
pub mod partitions;
pub mod process;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result, SamplerError};
