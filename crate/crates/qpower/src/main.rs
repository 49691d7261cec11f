use std::process::ExitCode;

use clap::Parser;
use qpower::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            if code == 2 {
                eprintln!("numerical breakdown: {}", e);
            } else {
                eprintln!("error: {}", e);
            }
            ExitCode::from(code as u8)
        }
    }
}
