//! Batch driver for the tessellation experiments: configuration, the cells
//! file format and the subcommands behind the `tesslab` binary.

pub mod cellsfile;
pub mod commands;
pub mod config;
