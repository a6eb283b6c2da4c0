//! Command-line front end: TOML configuration, field export and
//! verification reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use commands::{Outcome, Status};
pub use config::{Format, GridSpec, Overrides, RunConfig};
pub use error::{CliError, Result};
