//! Command-line front end: configuration parsing, subcommand dispatch and
//! CSV output.

pub mod config;
pub mod dispatch;
