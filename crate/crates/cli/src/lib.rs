//! Command-line front end for the sequence-fluctuation toolkit.
//!
//! The library half exists so integration tests can exercise config
//! resolution, report serialization, and the experiment runner without
//! spawning the binary. The binary half (`main.rs`) is a thin argument
//! parser on top of [`runner::run_experiment`] and [`report::emit_report`].

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod runner;
pub mod selftest;
