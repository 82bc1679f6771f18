//! Feedback-free error detection combined with probabilistic error
//! cancellation on Clifford circuits.
//!
//! The crate compiles per-block order-K quasi-probability tables for the
//! Iceberg code, samples Pauli-frame trajectories of the mitigated protocol,
//! and evaluates closed-form sampling-cost expressions.

pub mod analytics;
pub mod clifford;
pub mod code;
pub mod compiler;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod pauli;
pub mod sampler;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString};
