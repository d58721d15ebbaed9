//! `bayesbag`: bagged Bayesian model selection experiments from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 resource-guard rejection.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmd;
mod config;
mod error;
mod ingest;
mod output;

use error::Result;

#[derive(Parser, Debug)]
#[command(name = "bayesbag", version, about = "Bagged Bayesian model selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Standard vs bagged pips over repeated simulated datasets
    Simulate(cmd::simulate::SimulateArgs),
    /// Feature selection on a CSV dataset and its random splits
    Select(cmd::select::SelectArgs),
    /// Limit-law curves for two and three models
    Asymptotics(cmd::asymptotics::AsymptoticsArgs),
    /// Mismatch index of the full linear model
    Mismatch(cmd::mismatch::MismatchArgs),
    /// HPD overlap between posterior sample files
    Overlap(cmd::overlap::OverlapArgs),
    /// Export one simulated dataset as CSV
    Dataset(cmd::dataset::DatasetArgs),
    /// Validate the files listed in an output directory's manifest
    SchemaCheck {
        /// Output directory containing manifest.json
        dir: PathBuf,
    },
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::Select(a) => cmd::select::run(a),
        Command::Asymptotics(a) => cmd::asymptotics::run(a),
        Command::Mismatch(a) => cmd::mismatch::run(a),
        Command::Overlap(a) => cmd::overlap::run(a),
        Command::Dataset(a) => cmd::dataset::run(a),
        Command::SchemaCheck { dir } => {
            for line in output::schema_check(dir)? {
                println!("{line}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
