//! File formats, configuration and command implementations behind the
//! `txmotif` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod gen;
pub mod io;
pub mod manifest;
pub mod snapshot;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
