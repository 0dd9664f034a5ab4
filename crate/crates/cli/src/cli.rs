use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::{cmd_experiment, cmd_run, cmd_validate, CommandResult, EXIT_FAILED, EXIT_USAGE};
use crate::config::{parse_config, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "kwc", version, about = "KWC grain-boundary solver")]
pub struct Cli {
    /// JSON configuration (or a manifest written by a previous command).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for random initial data; overrides `seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads for the parallel experiments (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured system.
    Run,
    /// Run a named numerical study, or `all` of them.
    Experiment { name: String },
    /// Check model assumptions and parameters.
    Validate,
}

fn report(result: &CommandResult) -> i32 {
    println!("{}", serde_json::to_string(result).unwrap_or_default());
    for a in result.assertions.iter().filter(|a| !a.passed) {
        eprintln!("FAIL {}: {}", a.name, a.detail);
    }
    for e in &result.errors {
        eprintln!("error: {e}");
    }
    result.exit_code
}

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path).map_err(|e| {
            println!("{}", json!({"status": "invalid_config", "violations": e.violations}));
            e.to_string()
        })?,
        None => RunConfig::default().resolve(Path::new(".")).map_err(|e| e.to_string())?,
    };
    if let Some(seed) = cli.seed {
        cfg.apply_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_FAILED;
        }
    };
    let out = cfg.output.dir.clone();
    let result = pool.install(|| match &cli.command {
        Command::Run => cmd_run(&cfg, &out),
        Command::Experiment { name } => cmd_experiment(name, &cfg, &out),
        Command::Validate => cmd_validate(&cfg, cli.out.as_deref()),
    });
    report(&result)
}
