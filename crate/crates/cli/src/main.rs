use std::fs;
use std::process::ExitCode;

use clap::Parser;

mod config;
mod run;

use config::{Cli, RunConfig};
use run::CliError;

fn load(cli: Cli) -> Result<RunConfig, CliError> {
    match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or a subcommand, not both".into())),
        (None, Some(command)) => Ok(RunConfig { command, common: cli.common }),
        (None, None) => Err(CliError::Config("no subcommand given (see --help)".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let config = match load(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run::run(&config) {
        Ok(report) => {
            println!("{}: {}", config.command.name(), report.summary);
            for p in &report.outputs {
                println!("wrote {}", p.display());
            }
            if config.common.require_pass && report.check == Some(false) {
                eprintln!("check failed");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
