//! Library surface of the `flatfactor` command-line tool: configuration
//! schema, report documents, and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod report;
