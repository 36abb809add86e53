mod args;
mod commands;
mod input;
mod svg;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Encode(input) => commands::encode(input, g),
        Command::Decode { inputs } => commands::decode_cmd(inputs, g),
        Command::Bench { input, rays } => commands::bench(input, *rays, g),
        Command::Gradcheck { trials, h } => commands::gradcheck_cmd(*trials, *h, g),
        Command::Render {
            input,
            instance,
            rays,
            no_rays,
        } => commands::render_cmd(input, instance.as_deref(), *rays, *no_rays, g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run `ptm --help` for usage");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
