use std::process::ExitCode;

use clap::Parser;
use hardylab_cli::{execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HARDYLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    ExitCode::from(execute(&cli) as u8)
}
