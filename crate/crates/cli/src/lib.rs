//! Command-line front end for `kernel-envelope`: dataset and model files,
//! envelope export, and scripted replications of two reference experiments.

pub mod commands;
pub mod error;
pub mod experiments;
pub mod io;
pub mod parallel;

pub use commands::{run, RunConfig};
pub use error::{CliError, Result};
