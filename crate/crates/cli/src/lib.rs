//! `tensorinf` command-line frontend. [`run`] is the whole program; the
//! binary only forwards the process arguments and exit status.

pub mod args;
mod error;
mod fit;
mod info;
mod output;
mod sim;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use error::CliError;

use args::{Cli, Command};

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status: 0 on success, 2 for argument, format and I/O errors,
/// 3 for numeric failures. Errors go to `stderr` as `error[<category>]: ...`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
        Err(e) => {
            let text = e.render().to_string();
            let _ = write!(stderr, "error[argument]: {}", text.trim_start_matches("error: "));
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Sim(a) => sim::run(a, stdout),
        Command::Fit { model } => fit::run(model, stdout),
        Command::Info(a) => info::run(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
