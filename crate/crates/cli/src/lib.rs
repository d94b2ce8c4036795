//! File formats and the command-line front end for `influence-core`.
//!
//! Networks are JSON documents (see [`document`]); the `influence` binary
//! validates, decomposes, evaluates, and compares them.

pub mod commands;
pub mod document;
pub mod report;

pub use document::{LoadError, NetworkDocument, ResultDocument};
