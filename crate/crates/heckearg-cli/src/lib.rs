//! Command implementations behind the `heckearg` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{load_or_build, run, Command};
pub use config::RunConfig;
pub use output::Outcome;
