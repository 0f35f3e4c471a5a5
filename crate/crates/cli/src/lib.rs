//! Command-line front end and experiment harness for `curkit`.
//!
//! - [`args`]: the command grammar.
//! - [`commands`]: subcommand implementations and exit codes.
//! - [`experiment`]: seeded Monte-Carlo experiments.
//! - [`stats`], [`table`], [`svg`]: summaries, CSV tables and charts.

pub mod args;
pub mod commands;
pub mod experiment;
pub mod stats;
pub mod svg;
pub mod table;

pub use commands::{exit_code, run};
