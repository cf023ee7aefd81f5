//! Deterministic CSV and JSON writers. Column order and the JSON shape are
//! frozen behind `schema_version`; floats are printed with Rust's
//! shortest-round-trip formatting, so identical inputs give identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use megsim::flooding::{phase_report, FloodRun, PhaseReport};
use megsim::rng::scoped_stream_seed;

use crate::config::ExperimentConfig;
use crate::runner::{ResultRecord, SweepOutcome};

pub const RECORD_COLUMNS: &[&str] = &[
    "schema_version",
    "config_hash",
    "model_id",
    "n",
    "seed",
    "trials",
    "epoch_len",
    "step_cap",
    "flood_median",
    "flood_mean",
    "flood_q90",
    "flood_whp",
    "timeout_rate",
    "spreading_mean",
    "saturation_mean",
    "alpha_hat",
    "alpha_radius",
    "beta_hat",
    "beta_radius",
    "alpha_analytic",
    "p_nm",
    "p_nm2",
    "eta",
    "t_mix",
    "bound_epoch",
    "bound_node_meg",
    "bound_edge",
    "bound_geometric",
    "bound_path_family",
    "bound_walk",
    "bound_comparator",
    "ratio_median_over_bound",
    "preconditions",
    "warnings",
];

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn record_row(r: &ResultRecord) -> String {
    [
        r.schema_version.to_string(),
        r.config_hash.clone(),
        csv_escape(&r.model_id),
        r.n.to_string(),
        r.seed.to_string(),
        r.trials.to_string(),
        opt(&r.epoch_len),
        r.step_cap.to_string(),
        opt(&r.flood_median),
        opt(&r.flood_mean),
        opt(&r.flood_q90),
        opt(&r.flood_whp),
        r.timeout_rate.to_string(),
        opt(&r.spreading_mean),
        opt(&r.saturation_mean),
        opt(&r.alpha_hat),
        opt(&r.alpha_radius),
        opt(&r.beta_hat),
        opt(&r.beta_radius),
        opt(&r.alpha_analytic),
        opt(&r.p_nm),
        opt(&r.p_nm2),
        opt(&r.eta),
        opt(&r.t_mix),
        opt(&r.bound_epoch),
        opt(&r.bound_node_meg),
        opt(&r.bound_edge),
        opt(&r.bound_geometric),
        opt(&r.bound_path_family),
        opt(&r.bound_walk),
        opt(&r.bound_comparator),
        opt(&r.ratio_median_over_bound),
        csv_escape(&r.preconditions),
        csv_escape(&r.warnings),
    ]
    .join(",")
}

/// Per-run CSV: one row per flooding trajectory.
pub const RUN_COLUMNS: &[&str] = &[
    "model_id",
    "n",
    "seed",
    "source",
    "flood_time",
    "spreading_time",
    "saturation_time",
    "timeout_flag",
];

fn run_row(model_id: &str, master_seed: u64, trial: usize, run: &FloodRun) -> String {
    let stream = scoped_stream_seed(master_seed, model_id, "flood", run.n, trial as u64);
    [
        csv_escape(model_id),
        run.n.to_string(),
        format!("{stream:016x}"),
        run.source.to_string(),
        opt(&run.flood_time),
        opt(&run.spreading_time),
        opt(&run.saturation_time()),
        (run.timed_out() as u8).to_string(),
    ]
    .join(",")
}

#[derive(Serialize)]
struct EstimateBlock<'a> {
    model_id: &'a str,
    n: usize,
    alpha: &'a Option<megsim::dynamic::AlphaEstimate>,
    beta: &'a Option<megsim::dynamic::BetaEstimate>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    label: &'a str,
    config_hash: String,
    mixing_eps: f64,
    config: &'a ExperimentConfig,
    records: Vec<&'a ResultRecord>,
    estimates: Vec<EstimateBlock<'a>>,
    phases: Option<PhaseReport>,
}

#[derive(Debug)]
pub struct OutputPaths {
    pub records_csv: PathBuf,
    pub runs_csv: PathBuf,
    pub summary_json: PathBuf,
}

/// Writes `records.csv`, `runs.csv`, and `summary.json` under `out_dir`.
pub fn write_outputs(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    outcomes: &[SweepOutcome],
) -> Result<OutputPaths> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let records_csv = out_dir.join("records.csv");
    let mut w = fs::File::create(&records_csv)?;
    writeln!(w, "{}", RECORD_COLUMNS.join(","))?;
    for o in outcomes {
        writeln!(w, "{}", record_row(&o.record))?;
    }

    let runs_csv = out_dir.join("runs.csv");
    let mut w = fs::File::create(&runs_csv)?;
    writeln!(w, "{}", RUN_COLUMNS.join(","))?;
    for o in outcomes {
        for (trial, run) in o.stats.runs.iter().enumerate() {
            writeln!(w, "{}", run_row(&o.record.model_id, cfg.seed, trial, run))?;
        }
    }

    let all_runs: Vec<FloodRun> = outcomes
        .iter()
        .flat_map(|o| o.stats.runs.iter().cloned())
        .collect();
    let phases = phase_report(&all_runs).ok();
    let summary = Summary {
        schema_version: cfg.schema_version,
        label: &cfg.label,
        config_hash: cfg.config_hash(),
        mixing_eps: megsim::markov::DEFAULT_MIXING_EPS,
        config: cfg,
        records: outcomes.iter().map(|o| &o.record).collect(),
        estimates: outcomes
            .iter()
            .map(|o| EstimateBlock {
                model_id: &o.record.model_id,
                n: o.record.n,
                alpha: &o.alpha,
                beta: &o.beta,
            })
            .collect(),
        phases,
    };
    let summary_json = out_dir.join("summary.json");
    fs::write(&summary_json, serde_json::to_string_pretty(&summary)?)?;

    Ok(OutputPaths {
        records_csv,
        runs_csv,
        summary_json,
    })
}
