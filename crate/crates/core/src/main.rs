use std::process::ExitCode;

use clap::Parser;
use magosc::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) if outcome.success => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("verification failed; see {}", cli.out.display());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
