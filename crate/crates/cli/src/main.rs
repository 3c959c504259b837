//! `levystab` experiment runner.
//!
//! ```text
//! levystab --config run.json [--set key.path=value]... [--output PATH]
//!          [--format json|csv] [--seed N]
//! ```
//!
//! Exit status: 0 success, 2 no martingale measure, 3 non-equivalent pair or
//! failed integrability, 4 configuration error, 1 anything else.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::Format;

#[derive(Debug, Parser)]
#[command(name = "levystab", version, about = "Martingale measures and price-stability bounds for exponential Levy models")]
struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config value by dotted path, e.g. `--set model.params.N=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for every random draw of the run.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let benign = !e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if benign { 0 } else { 4 });
        }
    };
    match report::execute(&args.config, &args.set, args.output, args.format, args.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report::print_error(&e);
            ExitCode::from(e.status as u8)
        }
    }
}

