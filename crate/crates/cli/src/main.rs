mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Output;

pub enum CliError {
    Usage(String),
    Lib(genbound::Error),
    /// Number of failed checks.
    Failures(u64),
}

impl From<genbound::Error> for CliError {
    fn from(e: genbound::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(genbound::Error::Io(_)) => 3,
            CliError::Lib(genbound::Error::Csv(e)) if e.is_io_error() => 3,
            CliError::Lib(_) => 2,
            CliError::Failures(k) => (3 + (*k).min(97)) as u8,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {jobs} worker threads: {e}")))?;
    }
    let out = Output {
        format: cli.format,
        bits: cli.bits,
    };
    match &cli.command {
        Command::Bound(a) => commands::bound(a, &out),
        Command::Sweep(a) => commands::sweep(a, &out),
        Command::Audit(a) => commands::audit(a, &out),
        Command::Grid(a) => commands::grid(a, &out),
        Command::Verify(a) => commands::verify(a, &out),
        Command::GenExp(a) => commands::gen_exp(a, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Lib(err) => eprintln!("error: {err}"),
                CliError::Failures(k) => eprintln!("{k} check(s) failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
