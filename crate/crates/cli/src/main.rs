use std::process::ExitCode;

use clap::Parser;

use pqec_cli::config::{parse_config, Cli};
use pqec_cli::run::Status;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (command, args) = cli.command.split();
    let result = parse_config(command, args).and_then(|config| pqec_cli::execute(&config));
    match result {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::NoCrossing) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
