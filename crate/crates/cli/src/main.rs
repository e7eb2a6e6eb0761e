use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fingerloc_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fingerloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
