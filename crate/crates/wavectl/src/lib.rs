//! Command-line front end for `wavectl-core`: configuration loading, CSV,
//! JSON and Touchstone formats, parallel scans, and run reports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;
pub mod touchstone;

pub use error::{CliError, Result};
