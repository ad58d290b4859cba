//! `hamkit` — command-line front end for kernel hypothesis checks,
//! cone-based existence certificates, and fixed-point solves of
//! Hammerstein integral equations.
//!
//! The binary wraps [`hamkit_core`]; everything here is config parsing,
//! orchestration, and report emission.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{run, run_reproduce, CliError, Command, RunOptions, RunOutcome};
pub use config::{parse_config, parse_rational, ConfigError, ProblemConfig};
pub use report::{render_text, residual_table, solution_table, RunReport};
