//! Influence-diagram evaluation by reduction to Bayesian-network inference.
//!
//! The evaluator repeatedly carves a diagram around its tail decision node:
//! the downstream part (the *tail*) becomes a small Bayesian network from
//! which the optimal rule for that decision is read off, and the rest (the
//! *body*) receives a new utility node summarising the tail's optimal value.
//! Every probabilistic question the evaluator asks is answered by a pluggable
//! [`inference::InferenceEngine`]; variable elimination is built in.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in the companion `influence` crate.
//!
//! Modules:
//! - [`factors`]: dense table algebra.
//! - [`model`]: diagrams, validation, and graph queries.
//! - [`inference`]: relevance pruning, elimination orders, variable elimination.
//! - [`decomposition`]: tail/body carving and Cooper's transformation.
//! - [`evaluator`]: the reduction algorithm and its driver loop.
//! - [`baselines`]: fusion, Shachter-Peot, and exhaustive oracles.
//! - [`random`]: seeded generators for randomized test suites.

#![no_std]

#[cfg(test)]
extern crate std;

extern crate alloc;

pub mod baselines;
pub mod decomposition;
pub mod error;
pub mod evaluator;
pub mod factors;
pub mod inference;
pub mod model;
pub mod random;

pub use error::{Error, Result};
pub use factors::{ArgTable, Factor, Variable};
pub use model::{InfluenceDiagram, Name, NameSet, Node, NodeKind};

/// Absolute tolerance used for probability checks.
pub const TOLERANCE: f64 = 1e-9;
