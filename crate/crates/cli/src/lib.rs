//! Library behind the `gec` binary: configuration, subcommand
//! implementations, and report rendering. Exposed so integration tests
//! can drive the same code paths as the CLI.

pub mod commands;
pub mod config;
pub mod report;
