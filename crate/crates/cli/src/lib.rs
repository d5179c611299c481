//! `gpsurr` command-line tool.
//!
//! Subcommands mirror the modelling workflow: `generate` an oracle
//! database, `train` a surrogate, `predict` curves, `backpredict` a design
//! value, `compare` model families and `serve` saved models over HTTP.
//! [`run`] parses arguments (merging `--config`), executes, prints, and
//! returns the process exit code.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::{backpredict, compare, generate, predict, serve, train};
use crate::error::{exit, CliError, Result};
use crate::io::to_json_pretty;

/// Parses `raw` (program name first) after splicing in `--config` values.
pub fn parse(raw: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let expanded = config::expand_args(raw).map_err(ParseFailure::Config)?;
    Cli::try_parse_from(expanded).map_err(ParseFailure::Clap)
}

#[derive(Debug)]
pub enum ParseFailure {
    Config(CliError),
    Clap(clap::Error),
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Executes a parsed command, writing human output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let print = |out: &mut dyn Write, s: &str| {
        out.write_all(s.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}")))
    };
    match &cli.command {
        Command::Generate(a) => {
            let s = generate::run(a)?;
            print(
                out,
                &format!(
                    "wrote {} {} runs ({} rows) to {}\nconfig_hash {}\n",
                    s.runs,
                    s.kind.as_str(),
                    s.rows,
                    a.out.display(),
                    s.config_hash
                ),
            )
        }
        Command::Train(a) => {
            let m = train::run(a)?;
            print(out, &to_json_pretty(&m))
        }
        Command::Predict(a) => {
            let p = predict::run(a)?;
            if a.out.is_none() && a.json_out.is_none() {
                print(out, &p.csv)?;
            }
            Ok(())
        }
        Command::Backpredict(a) => {
            let r = backpredict::run(a)?;
            print(out, &to_json_pretty(&r))
        }
        Command::Compare(a) => {
            let c = compare::run(a)?;
            print(out, &compare::summary_table(&c.summary))
        }
        Command::Serve(a) => serve::run(a),
    }
}

/// Full entry point; returns the exit code.
pub fn run(raw: Vec<OsString>) -> i32 {
    let cli = match parse(raw) {
        Ok(c) => c,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    init_logging(cli.verbose);
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
