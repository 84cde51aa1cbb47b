use std::process::ExitCode;

use clap::Parser;
use lagpolar_cli::commands::{run, Cli};
use lagpolar_cli::error::CliError;

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| emit(&cli, &o.text).map(|_| o));
    match outcome {
        Ok(o) => {
            if let Some(d) = &o.diagnostic {
                eprintln!("lagpolar: {d}");
            }
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("lagpolar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
