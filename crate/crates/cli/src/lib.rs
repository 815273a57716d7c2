//! Library side of the `pbcov` binary: configuration schema, output
//! plumbing, and the subcommand drivers. Kept as a library so integration
//! tests can parse configs and reuse the drivers directly.

pub mod commands;
pub mod config;
pub mod output;
