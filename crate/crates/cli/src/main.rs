use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hfree::{exit_code, run, RunOptions, Status};

#[derive(Parser)]
#[command(name = "hfree", version, about = "Certify and construct maps that are free along a distribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its report and artifacts.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Seed for random points and maps; overrides the scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Relative rank tolerance; overrides the scenario.
        #[arg(long)]
        tol: Option<f64>,
        /// Worker threads (0 or absent: one per core).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        scenario,
        out,
        seed,
        tol,
        threads,
    } = Cli::parse().command;
    let opts = RunOptions {
        out,
        seed,
        tol,
        threads: threads.filter(|&n| n > 0),
    };
    let result = run(&scenario, &opts);
    match &result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let verdict = if outcome.status == Status::Pass { "pass" } else { "fail" };
            if let Some(report) = outcome.files.last() {
                println!("{verdict}: report written to {}", report.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
