//! `ntrn`: encode, decode, pack and inspect NativeTernary containers.

mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = commands::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ntrn: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
