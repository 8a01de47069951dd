//! File formats and subcommands behind the `flowcheck` binary.

pub mod codec;
pub mod commands;
