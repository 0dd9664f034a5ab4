//! Command-line orchestration for `kwc-core` and `kwc-experiments`: strict
//! JSON configuration, the `run`, `experiment` and `validate` commands, and
//! the manifests and CSV artifacts they write.

pub mod cli;
pub mod commands;
pub mod config;
pub mod expr;
pub mod manifest;

pub use cli::{main_with_args, Cli, Command};
pub use commands::{cmd_experiment, cmd_run, cmd_validate, CommandResult, EXPERIMENTS};
pub use config::{parse_config, parse_config_str, ConfigError, RunConfig, Violation};
pub use expr::Expr;
pub use manifest::RunManifest;
