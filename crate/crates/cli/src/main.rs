use std::process::ExitCode;

use clap::Parser;
use vmesh_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("vmesh: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
