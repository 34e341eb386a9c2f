//! File formats, configuration and subcommands of the `wheelprobe` tool.
//!
//! All computation lives in `wheelprobe-core`; this crate reads and writes
//! PPM/PNG images, CSV measurement logs and JSON models, grids and reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use config::RunConfig;
pub use error::{exit, CliError};
