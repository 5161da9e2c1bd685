//! File formats and command bodies behind the `qrps` binary.

pub mod commands;
pub mod error;
pub mod output;
pub mod spec;
pub mod strategy_file;

pub use error::{CliError, Result};
