use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use chaotic_extremes::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.from_manifest.is_some() && cli.command.is_some() {
        // clap can't express "conflicts with any subcommand" declaratively.
        Cli::command()
            .error(
                clap::error::ErrorKind::ArgumentConflict,
                "--from-manifest cannot be combined with a subcommand",
            )
            .exit();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
