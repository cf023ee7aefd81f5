//! Batch experiment runner for MEG flooding simulations.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use megsim_cli::config::ExperimentConfig;
use megsim_cli::runner::analyze_sweep_point;
use megsim_cli::{presets, run_experiment, verify};

#[derive(Parser)]
#[command(
    name = "megsim",
    about = "Simulate flooding over Markovian evolving graphs and validate flooding-time bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Path to an experiment config JSON file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in preset (see `megsim presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial-count override.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = library default). Outputs never depend on this.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Abort on the first failing sweep point instead of recording it.
    #[arg(long)]
    strict: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(name)) => {
                presets::preset(name).with_context(|| format!("unknown preset {name:?}"))?
            }
            _ => bail!("exactly one of --config or --preset is required"),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: flooding, estimators, bounds; write CSV + JSON.
    Simulate(ConfigArgs),
    /// Run only the stationarity estimators; write estimates.json.
    Estimate(ConfigArgs),
    /// Evaluate the bound formulas from model analytics; no simulation.
    Bound(ConfigArgs),
    /// Run the inequality and concentration verification suites.
    Verify {
        /// Random instances per suite.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Optional output directory for verify.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in presets.
    Presets,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Simulate(args) => {
            let cfg = args.load()?;
            let (paths, failures) = run_experiment(&cfg, &args.out, args.workers, args.strict)?;
            println!("records: {}", paths.records_csv.display());
            println!("runs:    {}", paths.runs_csv.display());
            println!("summary: {}", paths.summary_json.display());
            if !failures.is_empty() {
                for f in &failures {
                    eprintln!("sweep point failed: {f}");
                }
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate(args) => {
            let cfg = args.load()?;
            let mut blocks = Vec::new();
            let mut failed = false;
            for &n in &cfg.sweep {
                match megsim_cli::runner::run_sweep_point(
                    &ExperimentConfig {
                        trials: 1, // flooding is incidental here; keep it cheap
                        step_cap: Some(1),
                        ..cfg.clone()
                    },
                    n,
                ) {
                    Ok(o) => blocks.push(serde_json::json!({
                        "model_id": o.record.model_id,
                        "n": n,
                        "epoch_len": o.record.epoch_len,
                        "alpha": o.alpha,
                        "beta": o.beta,
                    })),
                    Err(e) if args.strict => return Err(e),
                    Err(e) => {
                        eprintln!("n = {n}: {e:#}");
                        failed = true;
                    }
                }
            }
            fs::create_dir_all(&args.out)?;
            let path = args.out.join("estimates.json");
            fs::write(&path, serde_json::to_string_pretty(&blocks)?)?;
            println!("estimates: {}", path.display());
            Ok(if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Bound(args) => {
            let cfg = args.load()?;
            let mut reports = Vec::new();
            for &n in &cfg.sweep {
                let analysis = analyze_sweep_point(&cfg, n)?;
                println!(
                    "{} n={n}: node_meg={:?} edge={:?} geometric={:?} path_family={:?} walk={:?} comparator={:?}",
                    analysis.model_id,
                    analysis.bounds.bound_node_meg,
                    analysis.bounds.bound_edge,
                    analysis.bounds.bound_geometric,
                    analysis.bounds.bound_path_family,
                    analysis.bounds.bound_walk,
                    analysis.bounds.bound_comparator,
                );
                reports.push(serde_json::json!({
                    "model_id": analysis.model_id,
                    "n": n,
                    "bounds": analysis.bounds,
                    "warnings": analysis.warnings,
                }));
            }
            fs::create_dir_all(&args.out)?;
            let path = args.out.join("bounds.json");
            fs::write(&path, serde_json::to_string_pretty(&reports)?)?;
            println!("bounds: {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { samples, seed, out } => {
            let report = verify::run_verify(samples, seed)?;
            for s in &report.suites {
                println!(
                    "[{}] {} — {}/{} checks passed ({})",
                    if s.pass { "PASS" } else { "FAIL" },
                    s.suite,
                    s.checks - s.failures,
                    s.checks,
                    s.detail
                );
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                let path = dir.join("verify.json");
                fs::write(&path, serde_json::to_string_pretty(&report)?)?;
                println!("report: {}", path.display());
            }
            Ok(if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Presets => {
            for (name, desc) in presets::preset_names() {
                println!("{name:20} {desc}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
