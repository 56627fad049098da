//! Command-line front end: `corrupt`, `denoise`, `eval`, `bench` and
//! `superres`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use args::{Cli, Command};
pub use error::CliError;

use clap::error::ErrorKind;
use clap::Parser;
use std::ffi::OsString;
use std::io::Write;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Corrupt(a) => commands::corrupt_cmd(a, out),
        Command::Denoise(a) => commands::denoise_cmd(a, out),
        Command::Eval(a) => commands::eval_cmd(a, out),
        Command::Bench(a) => commands::bench_cmd(a, out),
        Command::Superres(a) => commands::superres_cmd(a, out),
    }
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 success, 1 usage error, 2 I/O or parse error, 3 solver failure.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    0
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    1
                }
            };
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
