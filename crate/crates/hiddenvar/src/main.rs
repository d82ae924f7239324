use std::process::ExitCode;

use clap::Parser;
use hiddenvar::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{}: {summary}", cli.command.name());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
