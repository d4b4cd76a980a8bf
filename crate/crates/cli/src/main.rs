use std::process::ExitCode;

use cablewalk_cli::commands::{run, Cli};
use cablewalk_cli::exit_code;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Exit code 2 is reserved for unreadable images.
            return if e.use_stderr() { ExitCode::from(exit_code::GENERIC) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
