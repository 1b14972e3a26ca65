mod args;
mod commands;
mod logger;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Exit status classes: 1 means the analysis ran but found nothing usable,
/// 2 a usage error, 3 an I/O or parse failure.
#[derive(Debug)]
pub enum Failure {
    Negative(anyhow::Error),
    Usage(anyhow::Error),
    Input(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Negative(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Negative(e) | Failure::Usage(e) | Failure::Input(e) => e,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    logger::init(cli.global.log_level.filter(), &cli.global.log_channels);
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!(target: "cli", "{:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
