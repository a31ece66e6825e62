//! `qhflux` command-line front end.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::CliError;
use config::{Command, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "qhflux", version, about = "Quasi-hole partition functions, emergent potentials and their verification")]
struct Cli {
    /// Run the configuration in this JSON file (e.g. a previous run's config.json)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; single-table commands print to stdout without it
    #[arg(long = "out", global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads for the data-parallel kernels
    #[arg(long, env = "QHFLUX_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?
        }
        (None, Some(command)) => RunConfig { seed: 0, output_dir: None, format: Format::Csv, threads: None, command },
        (Some(_), Some(_)) => return Err(CliError::Usage("--config cannot be combined with a subcommand".into())),
        (None, None) => return Err(CliError::Usage("a subcommand or --config is required (see --help)".into())),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.out.is_some() {
        cfg.output_dir = cli.out;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("thread count must be positive".into())),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(format!("thread pool: {e}"))),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // clap exits 2 on usage errors and 0 for --help/--version
        Err(e) => e.exit(),
    };
    let result = resolve(cli).and_then(|cfg| {
        configure_threads(cfg.threads)?;
        commands::run(&cfg)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
