use std::process::ExitCode;

use clap::Parser;
use rydfrag::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
