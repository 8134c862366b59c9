//! Configuration, run orchestration and persistence for the subcommands.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_invariant, cmd_moll_limit, cmd_simulate, cmd_verify, cmd_zeta_alpha, Outcome, RunOptions};
pub use config::RunConfig;
