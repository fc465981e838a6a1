//! Library side of the `collapse-kit` binary: configuration, command
//! execution and rendering. [`run`] returns everything it would write, so
//! the binary only touches the file system in `main`.

pub mod config;
mod render;
mod run;

use std::path::PathBuf;

pub use config::{Cli, Command, CommandKind, Format, Opts, RunConfig, Solver};
pub use run::{run, validation_checks, Check};

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; exit status 2.
    Usage(String),
    /// Numerical failure; exit status 1.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<collapse_kit::Error> for CliError {
    fn from(e: collapse_kit::Error) -> Self {
        Self::Numerical(e.to_string())
    }
}

/// Result of a run: files to write, text for stdout and whether a
/// validation threshold failed.
#[derive(Debug, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<(PathBuf, String)>,
    pub stdout: String,
    /// Per-point failures that did not stop the run.
    pub warnings: Vec<String>,
    pub failed: bool,
}

impl Outcome {
    pub fn write(&self) -> Result<(), CliError> {
        for (path, body) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Parses arguments, runs and writes; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (kind, opts) = cli.command.split();
    let result = opts
        .merged()
        .and_then(|o| RunConfig::from_opts(kind, o))
        .and_then(|cfg| run(&cfg))
        .and_then(|out| out.write().map(|_| out));
    match result {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", out.stdout);
            if out.failed {
                eprintln!("one or more validation checks failed");
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
