//! Command-line front end for `ris-perf`.
//!
//! The binary is a thin wrapper around [`run`], which takes the argument list
//! and output streams explicitly so the integration tests can drive it
//! in-process.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod eval;
mod figure;
mod params;
pub mod plot;
mod sweep;
mod validate;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_STRICT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Strict(String),
}

impl CliError {
    pub(crate) fn usage(e: ris_perf::Error) -> Self {
        Self::Usage(e.to_string())
    }

    pub(crate) fn io(what: &str, e: std::io::Error) -> Self {
        Self::Io(format!("{what}: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Numerical(_) | Self::Io(_) => EXIT_NUMERICAL,
            Self::Strict(_) => EXIT_STRICT,
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
///
/// `color` enables ANSI highlighting in the validation report.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Params(a) => params::run(&a, stdout),
        Command::Sweep(a) => sweep::run(&a, stdout, stderr),
        Command::Figure(a) => figure::run(&a, stdout),
        Command::Validate(a) => validate::run(&a, stdout, color),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// A rayon pool with `jobs` threads, or the default size.
pub(crate) fn pool(jobs: Option<u32>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j as usize);
    }
    b.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))
}

pub(crate) fn workers(jobs: Option<u32>) -> usize {
    match jobs {
        Some(j) => j as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
pub(crate) fn emit(path: Option<&std::path::Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(&p.display().to_string(), e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("standard output", e)),
    }
}
