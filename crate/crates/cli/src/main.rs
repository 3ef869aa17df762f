use std::process::ExitCode;

use clap::Parser;
use mtmf_cli::{execute, Cli, RunConfig};

fn main() -> ExitCode {
    let (command, flags) = Cli::parse().command.split();
    let result = RunConfig::from_flags(command, &flags).and_then(|config| execute(&config));
    match result {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
