//! `clairaut`: run geodesic, Fermat-point and Clairaut-constant computations
//! described by a JSON scenario file.

mod commands;
mod report;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clairaut_core::GeoError;
use clap::Parser;

use commands::{Command, PathSink};
use report::{RunReport, CONVENTIONS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
            CliError::Output(m) => CliError::Output(format!("{what}: {m}")),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "clairaut", version, about = "Geodesics, weighted Fermat points and Clairaut constants on surfaces of revolution")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (JSON). Optional for `verify`.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for branch polylines as CSV.
    #[arg(long)]
    paths: Option<PathBuf>,
    /// Worker threads for multi-start searches.
    #[arg(long)]
    threads: Option<usize>,
    /// Run only these verification suites (repeatable).
    #[arg(long = "suite")]
    suites: Vec<u32>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(args: &Args) -> Result<u8, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let loaded = args.scenario.as_deref().map(scenario::load_scenario).transpose()?;

    let start = Instant::now();
    let sink = PathSink {
        dir: args.paths.as_deref(),
        surface: loaded.as_ref().map(|l| &l.surface),
    };
    let outcome = commands::run(args.command, loaded.as_ref(), &args.suites, &sink)?;
    let report = RunReport {
        command: args.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        scenario_digest: loaded.as_ref().map(|l| l.digest.clone()),
        conventions: CONVENTIONS,
        results: outcome.results,
        warnings: outcome.warnings,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    for w in &report.warnings {
        eprintln!("warning [{}]: {}", w.kind, w.message);
    }

    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string()))?,
    }
    Ok(if outcome.failed { 3 } else { 0 })
}
