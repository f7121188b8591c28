//! Command-line tooling for `lorenz-core`: JSON map and sweep
//! specifications, report emission, tab-separated exports for plotting, and
//! parameter sweeps over a worker pool.

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

pub use cli::run;
pub use error::{Result, ToolError};
