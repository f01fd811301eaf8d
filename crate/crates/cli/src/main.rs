use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = fadebound_cli::Cli::parse();
    match fadebound_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fadebound: {e}");
            e.exit_code()
        }
    }
}
