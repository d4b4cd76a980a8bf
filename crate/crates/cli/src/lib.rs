//! Command implementations behind the `cablewalk` binary.

pub mod commands;
pub mod error;
pub mod options;
pub mod output;
pub mod seeds;
pub mod serve;

pub use error::{exit_code, CliError};
