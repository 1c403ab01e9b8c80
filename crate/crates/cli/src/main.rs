//! `cdi`: batch front-end for `cdi-core`.
//!
//! ```text
//! cdi <classify|scale|hitting|limitlaw|simulate|speed|hypotheses> --config run.toml [--out DIR]
//! ```
//!
//! Writes `<command>.json` (always, including on errors after the config
//! parsed) and any CSV tables into the output directory, and prints one
//! summary line. Exit status: 0 on success, 2 when a verdict is
//! inconclusive, 1 on errors.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{parse_config, Command};
use crate::error::CliError;
use crate::report::{output_dir, to_json, write_file, Envelope, ErrorReport};

#[derive(Debug, Parser)]
#[command(name = "cdi", version, about = "Entrance boundaries, hitting times and simulation for time-changed Levy processes")]
struct Args {
    command: Command,
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory (overrides `run.output_dir` and `CDI_OUT_DIR`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cdi {}: {e}", args.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(args: &Args) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::io(format!("reading {}", args.config.display()), e))?;
    let cfg = parse_config(&text, &args.config, args.command)?;
    let dir = output_dir(args.out.as_deref(), &cfg);
    let name = args.command.name();
    let outcome = commands::run(args.command, &cfg);
    let (result, error) = match &outcome {
        Ok(o) => (Some(&o.result), None),
        Err(e) => (None, Some(ErrorReport { kind: e.kind(), message: e.to_string() })),
    };
    let env = Envelope { command: name, seed: cfg.run.seed, config_echo: &cfg, result, error };
    let json_path = write_file(&dir, &format!("{name}.json"), &to_json(&env))?;
    let o = outcome?;
    for (file, csv) in &o.tables {
        write_file(&dir, file, csv.as_str())?;
    }
    println!("{} [{}]", o.summary, json_path.display());
    Ok(if o.inconclusive { 2 } else { 0 })
}
