//! Library surface of the experiment runner: configuration, model building,
//! the per-sweep-point pipeline, deterministic output writers, and the
//! verification suites exposed by the `verify` subcommand.

pub mod config;
pub mod model;
pub mod output;
pub mod presets;
pub mod runner;
pub mod verify;

use std::path::Path;

use anyhow::{Context, Result};

use config::ExperimentConfig;
use output::OutputPaths;
use runner::{run_sweep_point, SweepOutcome};

/// Runs every sweep point of the config and writes the output files.
///
/// `workers` pins the rayon pool size (0 = library default); outputs are
/// byte-identical for any worker count. With `strict` set, a failing sweep
/// point aborts the run; otherwise the failure is recorded and the
/// remaining points still run.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
    strict: bool,
) -> Result<(OutputPaths, Vec<String>)> {
    cfg.validate()?;
    let body = || -> Result<(Vec<SweepOutcome>, Vec<String>)> {
        let mut outcomes = Vec::new();
        let mut failures = Vec::new();
        for &n in &cfg.sweep {
            match run_sweep_point(cfg, n) {
                Ok(o) => outcomes.push(o),
                Err(e) if strict => return Err(e.context(format!("sweep point n = {n} (strict)"))),
                Err(e) => failures.push(format!("n = {n}: {e:#}")),
            }
        }
        Ok((outcomes, failures))
    };
    let (outcomes, failures) = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("building worker pool")?;
        pool.install(body)?
    } else {
        body()?
    };
    if outcomes.is_empty() {
        anyhow::bail!("no sweep point succeeded: {}", failures.join(" | "));
    }
    let paths = output::write_outputs(out_dir, cfg, &outcomes)?;
    Ok((paths, failures))
}
