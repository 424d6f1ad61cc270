//! Scenario-driven front end for `hfree-core`.
//!
//! [`run`] reads one scenario file, executes its task and writes
//! `report.json` plus the task's CSV or SVG artifacts into an output
//! directory. Settings are resolved as command line flag, then scenario
//! value, then built-in default.

pub mod output;
pub mod scenario;
pub mod svg;
pub mod tasks;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use scenario::{Scenario, ScenarioError, TaskKind, TaskSpec};
pub use tasks::{parallel_trial, sample_points, Context, InputError, TaskOutput};

/// Seed used when neither the command line nor the scenario sets one.
pub const DEFAULT_SEED: u64 = 0;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}: {source}")]
    Scenario { file: String, source: ScenarioError },
    #[error("{file}: {source}")]
    Input { file: String, source: InputError },
    #[error("{0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: Status,
    pub report: Value,
    /// Every file written, the report last.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// `0` when every check passed, `2` when a check failed, `1` for input errors.
pub fn exit_code(result: &Result<RunOutcome, RunError>) -> i32 {
    match result {
        Ok(RunOutcome { status: Status::Pass, .. }) => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn run(path: &Path, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let file = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let scenario = Scenario::parse(&text).map_err(|source| RunError::Scenario {
        file: file.clone(),
        source,
    })?;
    if let Some(tol) = opts.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(RunError::Options(format!("--tol must be positive, found {tol}")));
        }
    }
    let seed = opts.seed.or(scenario.seed).unwrap_or(DEFAULT_SEED);
    let tol = opts.tol.or(scenario.tol).unwrap_or(hfree_core::DEFAULT_RANK_TOL);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Options(e.to_string()))?;

    let ctx = Context { seed, tol, pool: &pool };
    let output = tasks::execute(&scenario, &ctx).map_err(|source| RunError::Input {
        file: file.clone(),
        source,
    })?;

    fs::create_dir_all(&opts.out).map_err(io_error(&opts.out))?;
    let mut files = Vec::new();
    let mut names: Vec<&str> = output.files.iter().map(|(n, _)| n.as_str()).collect();
    names.sort_unstable();
    for (name, contents) in &output.files {
        files.push(output::write_atomic(&opts.out, name, contents.as_bytes()).map_err(io_error(&opts.out))?);
    }
    let status = if output.pass { Status::Pass } else { Status::Fail };
    let report = json!({
        "header": {
            "tool": "hfree",
            "version": VERSION,
            "core_version": hfree_core::VERSION,
            "scenario": file,
            "task": scenario.kind.name(),
            "seed": seed,
            "tol": tol,
        },
        "status": match status { Status::Pass => "pass", Status::Fail => "fail" },
        "summary": output.summary,
        "points": output.points,
        "failures": output.failures,
        "warnings": output.warnings,
        "artifacts": names,
    });
    let text = output::json_text(&report);
    files.push(output::write_atomic(&opts.out, "report.json", text.as_bytes()).map_err(io_error(&opts.out))?);
    Ok(RunOutcome {
        status,
        report,
        files,
        warnings: output.warnings,
    })
}
