use std::process::ExitCode;

use clap::Parser;
use pathsim_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pathsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
