//! Simulation, file formats, plots, benchmarks and commands around
//! `svalse-core`.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod plot;
pub mod simkit;

pub use error::{CliError, Result};
