//! Experiment harness and command-line front end for `alkrig`.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod plot;
pub mod summary;

pub use error::{BenchError, Result};
