//! Scenario runner for the quadsar simulator: config files, overrides,
//! sweeps, and the on-disk output formats.

pub mod config_io;
pub mod error;
pub mod output;
pub mod runner;
pub mod schema;

pub use error::{Error, Result};
pub use runner::RunConfig;
