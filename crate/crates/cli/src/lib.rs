//! Command-line driver for `richards-core`: scenario files, subcommands
//! and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod output;

pub use commands::{main_with, Cli, Command};
pub use config::{parse_config, Config};
pub use error::{CliError, Result};
pub use expr::Expr;
pub use output::{emit_csv, Manifest, Table, Value};
