use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = ehcoop::Cli::parse();
    ExitCode::from(ehcoop::run(&cli) as u8)
}
