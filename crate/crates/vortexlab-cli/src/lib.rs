//! Experiment runner for `vortexlab`.
//!
//! A run executes one subcommand over every scenario of a configuration file.
//! Each scenario writes its data files and a `summary.json` into its own
//! subdirectory of the output directory; a combined `summary.json` lists all
//! scenarios.  Summaries echo the parsed inputs, carry the metrics and the
//! pass/fail flags of every check, and contain no timings, so identical
//! configurations and seeds produce byte-identical summaries.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::Subcommand;
use rayon::prelude::*;
use serde_json::{json, Value};

use vortexlab::io::{write_json, SCHEMA_VERSION};

use crate::commands::{prepare, Job, Outcome};
use crate::config::{Config, ConfigError};

/// Every check of every scenario passed.
pub const EXIT_OK: i32 = 0;
/// At least one check failed or a scenario stopped with an error.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// The configuration, an input file or the output directory is unusable.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Flat Floer cylinders: energy identity, ∂̄ residual and monotonicity of H.
    SimulateFloer,
    /// Exact Fourier-mode solutions: segment energies and the mean-value inequality.
    EvolveModes,
    /// Coupled vortex solver with independent residual re-verification.
    SolveVortex,
    /// Yang–Mills–Higgs topological identity on a solved or loaded pair.
    YmhCheck,
    /// Exponential decay-rate fit of a `t,value` CSV.
    DecayFit,
    /// Chain-limit detector on a directory of rescaled line CSVs (or generated lines).
    ChainLimit,
    /// Chern–Weil integrality and limit holonomy of meromorphic connections.
    ChernWeil,
    /// Tree/connecting classification of nodal-curve bubble graphs.
    BubbleGraph,
    /// The full quantitative acceptance suite.
    Acceptance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SimulateFloer => "simulate-floer",
            Command::EvolveModes => "evolve-modes",
            Command::SolveVortex => "solve-vortex",
            Command::YmhCheck => "ymh-check",
            Command::DecayFit => "decay-fit",
            Command::ChainLimit => "chain-limit",
            Command::ChernWeil => "chern-weil",
            Command::BubbleGraph => "bubble-graph",
            Command::Acceptance => "acceptance",
        }
    }
}

/// Global options of a run.
#[derive(Clone, Debug)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    /// Overrides the configuration's `seed`.
    pub seed: Option<u64>,
    pub jobs: usize,
}

/// Result of one scenario.
#[derive(Debug)]
pub struct ScenarioReport {
    pub name: String,
    pub passed: bool,
    pub summary: Value,
    pub messages: Vec<String>,
    pub error: Option<String>,
}

fn scenario_summary(command: Command, name: &str, seed: u64, job: &Job, result: &Result<Outcome, String>) -> Value {
    let (metrics, checks, details, files, error) = match result {
        Ok(o) => (json!(o.metrics), json!(o.checks), Value::Object(o.details.clone()), json!(o.files), Value::Null),
        Err(e) => (json!({}), json!({}), json!({}), json!([]), json!(e)),
    };
    let passed = result.as_ref().is_ok_and(|o| o.checks.values().all(|&c| c));
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "scenario": name,
        "seed": seed,
        "inputs": job.inputs(),
        "metrics": metrics,
        "checks": checks,
        "details": details,
        "files": files,
        "error": error,
        "passed": passed,
    })
}

/// Parses the configuration into named jobs; nothing is executed or written.
pub fn plan(command: Command, opts: &Options) -> Result<(u64, Vec<(String, Job)>), ConfigError> {
    let config = match &opts.config {
        Some(path) => Config::load(path)?,
        None if command == Command::Acceptance => Config::defaults(),
        None => return Err(ConfigError::new(None, format!("`{}` needs --config <path>", command.name()))),
    };
    let seed = match opts.seed {
        Some(s) => {
            config.seed()?;
            s
        }
        None => config.seed()?.unwrap_or(0),
    };
    let mut jobs = Vec::new();
    for scope in config.scenarios() {
        let job = prepare(command, &scope, seed)?;
        scope.check_used()?;
        jobs.push((scope.name.clone(), job));
    }
    config.check_general_used()?;
    Ok((seed, jobs))
}

fn run_job(command: Command, seed: u64, name: &str, job: &Job, dir: &Path) -> ScenarioReport {
    let result = job.execute(dir).map_err(|e| e.to_string());
    let summary = scenario_summary(command, name, seed, job, &result);
    let passed = summary["passed"].as_bool().unwrap_or(false);
    let (messages, error) = match result {
        Ok(o) => (o.messages, None),
        Err(e) => (Vec::new(), Some(e)),
    };
    ScenarioReport { name: name.into(), passed, summary, messages, error }
}

/// Runs `command` and returns the process exit code.
pub fn run(command: Command, opts: &Options) -> i32 {
    let (seed, jobs) = match plan(command, opts) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    if opts.jobs == 0 {
        eprintln!("configuration error: --jobs must be at least 1");
        return EXIT_CONFIG;
    }
    for (name, _) in &jobs {
        if let Err(e) = std::fs::create_dir_all(opts.out.join(name)) {
            eprintln!("cannot create output directory {}: {e}", opts.out.join(name).display());
            return EXIT_CONFIG;
        }
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker threads: {e}");
            return EXIT_CONFIG;
        }
    };
    let reports: Vec<ScenarioReport> = pool.install(|| {
        jobs.par_iter().map(|(name, job)| run_job(command, seed, name, job, &opts.out.join(name))).collect()
    });

    let mut all_passed = true;
    for r in &reports {
        if let Err(e) = write_json(&opts.out.join(&r.name).join("summary.json"), &r.summary) {
            eprintln!("cannot write summary for {}: {e}", r.name);
            return EXIT_CONFIG;
        }
        for m in &r.messages {
            println!("{m}");
        }
        let failed: Vec<&str> = r.summary["checks"]
            .as_object()
            .map(|c| c.iter().filter(|(_, v)| v == &&Value::Bool(false)).map(|(k, _)| k.as_str()).collect())
            .unwrap_or_default();
        match (&r.error, r.passed) {
            (Some(e), _) => println!("[FAIL] {} {}: error: {e}", command.name(), r.name),
            (None, true) => println!("[PASS] {} {}", command.name(), r.name),
            (None, false) => println!("[FAIL] {} {}: failed checks {}", command.name(), r.name, failed.join(", ")),
        }
        all_passed &= r.passed;
    }
    let combined = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "seed": seed,
        "passed": all_passed,
        "scenarios": reports.iter().map(|r| r.summary.clone()).collect::<Vec<_>>(),
    });
    if let Err(e) = write_json(&opts.out.join("summary.json"), &combined) {
        eprintln!("cannot write {}: {e}", opts.out.join("summary.json").display());
        return EXIT_CONFIG;
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
