//! `tnkit`: load tensors, run one analysis, print a JSON report.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use report::Failure;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report::fail(&Failure::Usage(e.to_string().trim().to_string()));
        }
    };
    match report::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report::fail(&f),
    }
}
