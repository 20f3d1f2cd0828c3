//! Command implementations behind the `graphrx` binary: layered
//! configuration, checkpoint container and JSONL reports.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod report;
