mod json;
mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use run::{execute, RunError};
use scenario::{Command, ConfigError, Scenario};

/// Capillary and CMC graph toolkit: parameter gate, exact profiles, Newton
/// solves and discrete identity checks.
///
/// Exit status: 0 pass, 1 verification failure, 2 configuration error.
#[derive(Parser)]
#[command(name = "capgraph", version)]
struct Cli {
    /// Scenario file; its `[inputs]` and `[tolerances]` feed the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for result artifacts, one subdirectory per scenario.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scenarios run in parallel by `run`.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,
    /// Override a tolerance.
    #[arg(long = "tol", global = true, value_name = "KEY=VAL")]
    tol: Vec<String>,
    /// Set or override an input.
    #[arg(long = "set", global = true, value_name = "KEY=VAL")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Admissible (C, A) for the gradient estimate.
    Params {
        #[arg(value_parser = ["check", "menu", "perturb"])]
        action: String,
    },
    /// Closed-form capillary profiles.
    Exact {
        #[arg(value_parser = ["eval", "residual", "ode"])]
        action: String,
    },
    /// Newton solve of div(Du/W) = H.
    Solve {
        #[arg(value_parser = ["slab", "radial"])]
        action: String,
    },
    /// Discrete identity checks and the gradient estimate.
    Verify {
        #[arg(value_parser = ["kato", "boundary", "picone", "poincare", "jacobi", "gradient-bound"])]
        action: String,
    },
    /// Volume-growth parabolicity criterion.
    Parabolic {
        #[arg(value_parser = ["check"])]
        action: String,
    },
    /// Run scenario files, or every `*.toml` in the given directories.
    Run {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

enum Status {
    Pass,
    Fail,
    Config,
}

impl Status {
    fn code(&self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Config => 2,
        }
    }
}

fn document(s: &Scenario, outcome: &Result<run::Outcome, RunError>) -> Value {
    let mut doc = Map::new();
    doc.insert("scenario".into(), json!(s.name));
    doc.insert("command".into(), json!(s.command.name()));
    doc.insert("action".into(), json!(s.action));
    doc.insert("inputs".into(), serde_json::to_value(&s.inputs).unwrap_or(Value::Null));
    doc.insert("tolerances".into(), json!(s.tolerances));
    match outcome {
        Ok(o) => {
            doc.insert("pass".into(), json!(o.pass));
            doc.extend(o.result.clone());
        }
        Err(e) => {
            doc.insert("pass".into(), json!(false));
            let msg = match e {
                RunError::Config(c) => c.to_string(),
                RunError::Failed(f) => f.to_string(),
            };
            doc.insert("error".into(), json!(msg));
            if let RunError::Failed(capgraph::Error::Convergence { history, .. }) = e {
                doc.insert("convergence_history".into(), json!(history));
            }
        }
    }
    Value::Object(doc)
}

fn write_artifacts(dir: &Path, text: &str, csv: Option<&str>) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    std::fs::write(dir.join("result.json"), text).map_err(|e| format!("{}: {e}", dir.display()))?;
    if let Some(csv) = csv {
        std::fs::write(dir.join("data.csv"), csv).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    Ok(())
}

/// Runs one scenario; returns its status, the JSON text and a one-line summary.
fn run_scenario(s: &Scenario, out: Option<&Path>) -> (Status, String, String) {
    let outcome = execute(s);
    let text = json::to_string(&document(s, &outcome)).expect("documents serialize");
    let (mut status, mut summary) = match &outcome {
        Ok(o) if o.pass => (Status::Pass, String::new()),
        Ok(_) => (Status::Fail, "verification failed".to_string()),
        Err(RunError::Config(e)) => (Status::Config, e.to_string()),
        Err(RunError::Failed(e)) => (Status::Fail, e.to_string()),
    };
    if let Some(dir) = out {
        let csv = outcome.as_ref().ok().and_then(|o| o.csv.as_deref());
        if let Err(e) = write_artifacts(&dir.join(&s.name), &text, csv) {
            status = Status::Fail;
            summary = format!("cannot write artifacts: {e}");
        }
    }
    (status, text, summary)
}

fn scenario_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, ConfigError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "toml"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn single(cli: &Cli, command: Command, action: &str) -> Result<Scenario, ConfigError> {
    let mut s = match &cli.config {
        Some(path) => Scenario::from_file(path, Some((command, action)))?,
        None => Scenario::new(command, action, toml::Table::new())?,
    };
    for a in &cli.set {
        s.set_input(a)?;
    }
    for t in &cli.tol {
        s.set_tolerance(t)?;
    }
    Ok(s)
}

fn batch(cli: &Cli, paths: &[PathBuf]) -> ExitCode {
    if cli.config.is_some() || !cli.set.is_empty() {
        eprintln!("config error: `run` takes scenario paths, not --config or --set");
        return ExitCode::from(2);
    }
    let files = match scenario_files(paths) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start {} workers: {e}", cli.jobs);
            return ExitCode::from(1);
        }
    };
    let results: Vec<(String, Status, String)> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let loaded = Scenario::from_file(f, None).and_then(|mut s| {
                    for t in &cli.tol {
                        s.set_tolerance(t)?;
                    }
                    Ok(s)
                });
                match loaded {
                    Ok(s) => {
                        let (status, _, summary) = run_scenario(&s, cli.out.as_deref());
                        (s.label(), status, summary)
                    }
                    Err(e) => (f.display().to_string(), Status::Config, e.to_string()),
                }
            })
            .collect()
    });
    let mut worst = 0;
    for (label, status, summary) in &results {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Config => "CONFIG",
        };
        if summary.is_empty() {
            println!("[{tag}] {label}");
        } else {
            println!("[{tag}] {label}: {summary}");
        }
        worst = worst.max(status.code());
    }
    let passed = results.iter().filter(|r| matches!(r.1, Status::Pass)).count();
    println!("{passed}/{} scenarios passed", results.len());
    ExitCode::from(worst)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, action) = match &cli.cmd {
        Cmd::Params { action } => (Command::Params, action),
        Cmd::Exact { action } => (Command::Exact, action),
        Cmd::Solve { action } => (Command::Solve, action),
        Cmd::Verify { action } => (Command::Verify, action),
        Cmd::Parabolic { action } => (Command::Parabolic, action),
        Cmd::Run { paths } => return batch(&cli, paths),
    };
    let s = match single(&cli, command, action) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let (status, text, summary) = run_scenario(&s, cli.out.as_deref());
    print!("{text}");
    if !summary.is_empty() {
        let kind = if matches!(status, Status::Config) { "config error" } else { "failure" };
        eprintln!("{kind}: {summary}");
    }
    ExitCode::from(status.code())
}
