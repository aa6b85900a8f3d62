//! Run configuration, provenance and the subcommand drivers behind the
//! `quasiriesz` binary.

pub mod commands;
pub mod config;
