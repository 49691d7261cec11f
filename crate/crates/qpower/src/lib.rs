//! File formats and the `qpower` command line on top of `qpower-core`.
//!
//! * [`qpsv`]: binary statevector files
//! * [`model`]: model flags, custom JSON models, reference resolution
//! * [`output`]: CSV / JSON tables with provenance lines
//! * [`cli`] and [`commands`]: the subcommands

pub mod cli;
pub mod commands;
pub mod error;
pub mod model;
pub mod output;
pub mod qpsv;

use std::io::Write;

pub use cli::{Cli, Command, ExperimentConfig};
pub use error::{CliError, CliResult};

/// Provenance lines: version, subcommand, the full parsed flag set and the
/// seed. No timestamp, so repeated runs are byte-identical.
pub fn provenance(cli: &Cli) -> Vec<(String, String)> {
    let mut p = vec![
        ("qpower".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), cli.command.name().to_string()),
        ("flags".to_string(), format!("{:?}", cli.command)),
        ("seed".to_string(), cli.config.seed.to_string()),
    ];
    if let Some(t) = cli.config.threads {
        p.push(("threads".to_string(), format!("{} (advisory; runs are single threaded)", t)));
    }
    p
}

/// Runs the parsed command and writes its table to `--out` or stdout.
/// Warnings also go to stderr.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let table = commands::run(cli)?;
    for w in &table.warnings {
        eprintln!("warning: {}", w);
    }
    let text = table.render(cli.config.format, &provenance(cli));
    match &cli.config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
