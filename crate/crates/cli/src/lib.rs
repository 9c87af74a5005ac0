//! Command-line front end for the `nijenhuis` crate.
//!
//! [`run`] parses an argument list, executes one subcommand and writes its
//! report. Exit codes: `0` every check passed, `1` checks ran and failed,
//! `2` usage, parse or configuration error, `3` numerical failure.

mod args;
mod commands;
mod error;
mod input;
mod output;

use std::io::Write;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};
use nijenhuis::VerificationReport;

pub use args::{Check, Cli, Command, Format, Opts};
pub use error::CliError;

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = Cli::command()
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m).map(|cli| (cli, m)));
    let cli = match parsed {
        Ok((mut cli, matches)) => {
            if let Some((_, sub)) = matches.subcommand() {
                let groups: Vec<Vec<f64>> = sub
                    .get_occurrences::<f64>("point_values")
                    .map(|occ| occ.map(|o| o.copied().collect()).collect())
                    .unwrap_or_default();
                cli.command.opts_mut().point = groups;
            }
            cli
        }
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            let message = e.to_string().lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
            let err = CliError::Usage(message);
            emit_error(&err, "nijenhuis", Format::Json, None);
            return err.exit_code();
        }
    };
    let name = cli.command.name();
    let opts = cli.command.opts();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Construct(o) => commands::construct(o),
        Command::Torsion(o) => commands::torsion(o),
        Command::Verify { opts, check } => commands::verify(opts, *check),
        Command::Charpoly(o) => commands::charpoly_cmd(o),
        Command::Diagnose(o) => commands::diagnose(o),
        Command::PdeCheck(o) => commands::pde_check(o),
        Command::MorseReduce(o) => commands::morse(o),
    };
    match result {
        Ok(mut outcome) => {
            outcome.report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let body = match opts.format {
                Format::Json => output::json(&outcome.report, outcome.data.as_ref(), None),
                Format::Csv => output::csv(&outcome),
                Format::Text => output::text(&outcome),
            };
            if let Err(e) = write_sink(opts, &body) {
                emit_error(&e, name, Format::Json, None);
                return e.exit_code();
            }
            if outcome.report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            emit_error(&e, name, opts.format, Some(opts));
            e.exit_code()
        }
    }
}

fn write_sink(opts: &Opts, body: &str) -> Result<(), CliError> {
    match &opts.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Writes the JSON error report: to the configured sink in JSON mode, to
/// stderr otherwise.
fn emit_error(err: &CliError, command: &str, format: Format, opts: Option<&Opts>) {
    let mut report = VerificationReport::new(format!("{command} failed"));
    report.pass = false;
    let body = output::json(&report, None, Some(&err.reason()));
    let to_sink = format == Format::Json && opts.is_some_and(|o| write_sink(o, &body).is_ok());
    if !to_sink {
        if format == Format::Json && opts.is_none() {
            print!("{body}");
        } else {
            eprint!("{body}");
        }
    }
    if format != Format::Json {
        eprintln!("error: {err}");
    }
}
