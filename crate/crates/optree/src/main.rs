use std::process::ExitCode;

use clap::Parser;
use optree::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("optree: error: {e}");
            ExitCode::FAILURE
        }
    }
}
