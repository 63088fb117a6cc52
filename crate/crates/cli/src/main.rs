mod cli;
mod commands;
mod run;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use run::{Failure, Run};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    let checked_by_command = matches!(cli.command, Command::Validate { .. } | Command::CheckKernel { .. });
    let result = Run::prepare(&cli.command, &argv, !checked_by_command).and_then(|mut run| {
        let outcome = commands::execute(&cli.command, &mut run);
        let code = outcome.as_ref().map_or_else(Failure::code, |_| 0);
        run.finish(code)?;
        outcome
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
