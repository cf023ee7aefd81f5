//! The flooding process over a MEG, its phase instrumentation, and the
//! evaluable epoch flooding-time bound.
//!
//! Flooding follows the snapshot recursion exactly: starting from
//! `I_0 = {source}`, each step first advances the process to obtain the new
//! edge set and then extends the informed set by every neighbor of an
//! informed node in that snapshot. (The surrounding prose convention that
//! indexes the driving edge set one step later is *not* implemented; the
//! one-step offset is immaterial to every measured quantity.)
//!
//! Two phases are recorded per run: the spreading phase until half the nodes
//! are informed, and the saturation phase until all are.

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::dynamic::{run_trials, MegProcess, NodeSet, Snapshot};

#[derive(Debug, Error)]
pub enum FloodError {
    #[error("source {node} out of range for {n} nodes")]
    InvalidSource { node: usize, n: usize },
    #[error("step cap must be at least 1")]
    ZeroStepCap,
    #[error("alpha = {0} outside (0, 1]")]
    InvalidAlpha(f64),
    #[error("bound needs n ≥ 2, got {0}")]
    TooFewNodes(usize),
    #[error("no runs supplied")]
    NoRuns,
}

/// One flooding trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct FloodRun {
    pub n: usize,
    pub source: usize,
    /// `|I_t|` for `t = 0, 1, …`; nondecreasing, starts at 1.
    pub informed_sizes: Vec<u32>,
    /// First step with every node informed; `None` on timeout.
    pub flood_time: Option<u32>,
    /// First step with `|I_t| ≥ n/2`; `None` if never reached.
    pub spreading_time: Option<u32>,
    pub step_cap: u32,
}

impl FloodRun {
    /// Steps spent between half coverage and full coverage.
    pub fn saturation_time(&self) -> Option<u32> {
        match (self.flood_time, self.spreading_time) {
            (Some(f), Some(s)) => Some(f - s),
            _ => None,
        }
    }

    pub fn timed_out(&self) -> bool {
        self.flood_time.is_none()
    }
}

/// Runs flooding from `source` until full coverage or `step_cap` steps.
///
/// The process is reset from its initial distribution first, so a run is a
/// complete trajectory of the joint (graph, informed-set) process and is
/// deterministic given the stream.
pub fn flood(
    meg: &mut dyn MegProcess,
    source: usize,
    step_cap: usize,
    rng: &mut dyn RngCore,
) -> Result<FloodRun, FloodError> {
    let n = meg.node_count();
    if source >= n {
        return Err(FloodError::InvalidSource { node: source, n });
    }
    if step_cap == 0 {
        return Err(FloodError::ZeroStepCap);
    }
    meg.reset(rng);
    let mut informed = NodeSet::empty(n);
    informed.insert(source);
    let mut reached = NodeSet::empty(n);
    let mut snap = Snapshot::empty(n);
    let mut sizes = Vec::with_capacity(64);
    sizes.push(1u32);
    let mut spreading_time = if 2 >= n { Some(0) } else { None };
    let mut flood_time = if n == 1 { Some(0) } else { None };
    for t in 1..=step_cap {
        if flood_time.is_some() {
            break;
        }
        meg.advance_into(rng, &mut snap);
        reached.clear();
        snap.neighbors_into(&informed, &mut reached);
        informed.union_with(&reached);
        let count = informed.len();
        sizes.push(count as u32);
        if spreading_time.is_none() && 2 * count >= n {
            spreading_time = Some(t as u32);
        }
        if count == n {
            flood_time = Some(t as u32);
        }
    }
    debug_assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    Ok(FloodRun {
        n,
        source,
        informed_sizes: sizes,
        flood_time,
        spreading_time,
        step_cap: step_cap as u32,
    })
}

/// Which sources to flood from.
#[derive(Debug, Clone, Serialize)]
pub enum SourceSel {
    /// Round-robin over every node.
    All,
    List(Vec<usize>),
}

impl SourceSel {
    fn pick(&self, trial: usize, n: usize) -> usize {
        match self {
            SourceSel::All => trial % n,
            SourceSel::List(v) => v[trial % v.len()],
        }
    }

    fn cycle_len(&self, n: usize) -> usize {
        match self {
            SourceSel::All => n,
            SourceSel::List(v) => v.len(),
        }
    }
}

/// Quantile summary of a flooding-time sample; timeouts are treated as +∞,
/// so a quantile that lands in the timeout mass is `None`.
#[derive(Debug, Clone, Serialize)]
pub struct QuantileSummary {
    pub trials: usize,
    pub timeouts: usize,
    pub mean_finite: Option<f64>,
    pub median: Option<f64>,
    pub q90: Option<f64>,
    /// Quantile at level `1 − 1/n`, the high-probability convention.
    pub q_whp: Option<f64>,
}

fn summarize(times: &[Option<u32>], n: usize) -> QuantileSummary {
    let trials = times.len();
    let mut finite: Vec<u32> = times.iter().filter_map(|&t| t).collect();
    finite.sort_unstable();
    let timeouts = trials - finite.len();
    let quantile = |level: f64| -> Option<f64> {
        if trials == 0 {
            return None;
        }
        let rank = (level * trials as f64).ceil() as usize;
        let idx = rank.clamp(1, trials) - 1;
        finite.get(idx).map(|&t| t as f64)
    };
    QuantileSummary {
        trials,
        timeouts,
        mean_finite: if finite.is_empty() {
            None
        } else {
            Some(finite.iter().map(|&t| t as f64).sum::<f64>() / finite.len() as f64)
        },
        median: quantile(0.5),
        q90: quantile(0.9),
        q_whp: quantile(1.0 - 1.0 / n as f64),
    }
}

/// Aggregated flooding statistics over trials.
#[derive(Debug, Clone, Serialize)]
pub struct FloodStats {
    pub n: usize,
    pub pooled: QuantileSummary,
    /// `(source, summary)` for each source that ran.
    pub per_source: Vec<(usize, QuantileSummary)>,
    /// Distribution of `max_s F(G, s)` over complete source round-robins,
    /// when at least one full cycle ran.
    pub max_over_sources: Option<QuantileSummary>,
    pub mean_spreading: Option<f64>,
    pub mean_saturation: Option<f64>,
    pub timeout_rate: f64,
    pub all_timed_out: bool,
    pub runs: Vec<FloodRun>,
}

/// Floods `trials` independent trajectories in parallel (one process clone
/// and one derived stream per trial) and aggregates deterministically.
pub fn flooding_time_stats(
    proto: &dyn MegProcess,
    sources: &SourceSel,
    trials: usize,
    step_cap: usize,
    master_seed: u64,
) -> Result<FloodStats, FloodError> {
    if step_cap == 0 {
        return Err(FloodError::ZeroStepCap);
    }
    let n = proto.node_count();
    if let SourceSel::List(list) = sources {
        if list.is_empty() {
            return Err(FloodError::NoRuns);
        }
        if let Some(&bad) = list.iter().find(|&&s| s >= n) {
            return Err(FloodError::InvalidSource { node: bad, n });
        }
    }
    let runs: Vec<FloodRun> = run_trials(proto, "flood", master_seed, trials, |trial, meg, rng| {
        let source = sources.pick(trial, n);
        flood(meg, source, step_cap, rng).expect("validated source and cap")
    })
    .into_iter()
    .collect();

    let times: Vec<Option<u32>> = runs.iter().map(|r| r.flood_time).collect();
    let pooled = summarize(&times, n);

    let mut per_source: Vec<(usize, Vec<Option<u32>>)> = Vec::new();
    for run in &runs {
        match per_source.iter_mut().find(|(s, _)| *s == run.source) {
            Some((_, v)) => v.push(run.flood_time),
            None => per_source.push((run.source, vec![run.flood_time])),
        }
    }
    per_source.sort_by_key(|(s, _)| *s);
    let per_source: Vec<(usize, QuantileSummary)> = per_source
        .into_iter()
        .map(|(s, v)| (s, summarize(&v, n)))
        .collect();

    // Max over sources per complete round-robin cycle.
    let cycle = sources.cycle_len(n);
    let full_cycles = trials / cycle;
    let max_over_sources = if full_cycles >= 1 && cycle > 1 {
        let maxima: Vec<Option<u32>> = (0..full_cycles)
            .map(|c| {
                let window = &runs[c * cycle..(c + 1) * cycle];
                window
                    .iter()
                    .map(|r| r.flood_time)
                    .try_fold(0u32, |acc, t| t.map(|b| acc.max(b)))
            })
            .collect();
        Some(summarize(&maxima, n))
    } else {
        None
    };

    let spreading: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.spreading_time.map(f64::from))
        .collect();
    let saturation: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.saturation_time().map(f64::from))
        .collect();
    let timeout_rate = pooled.timeouts as f64 / trials.max(1) as f64;
    Ok(FloodStats {
        n,
        pooled,
        per_source,
        max_over_sources,
        mean_spreading: mean(&spreading),
        mean_saturation: mean(&saturation),
        timeout_rate,
        all_timed_out: runs.iter().all(|r| r.timed_out()),
        runs,
    })
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Inputs of the epoch flooding-time bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundParams {
    /// Epoch length in steps.
    pub epoch_len: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    /// Explicit constant multiplier; the asymptotic statement hides it.
    pub c: f64,
}

/// Evaluated bound, total and split by phase.
#[derive(Debug, Clone, Serialize)]
pub struct EpochBound {
    /// `c · M · (1/(nα) + β)² · (ln n)²` — the headline shape.
    pub steps: f64,
    /// Same inputs with the phase split made explicit: the spreading phase
    /// pays `(1/(nα)+β)² ln² n` epochs and saturation one factor fewer,
    /// `(1/(nα)+β) ln n`.
    pub per_phase_steps: f64,
    pub spreading_epochs: f64,
    pub saturation_epochs: f64,
}

/// Evaluates the epoch flooding-time bound for a process whose epoch-level
/// density and pairwise-dependence parameters are `alpha` and `beta`.
pub fn epoch_bound(p: &BoundParams) -> Result<EpochBound, FloodError> {
    if !(p.alpha > 0.0 && p.alpha <= 1.0) {
        return Err(FloodError::InvalidAlpha(p.alpha));
    }
    if p.n < 2 {
        return Err(FloodError::TooFewNodes(p.n));
    }
    let ln_n = (p.n as f64).ln();
    let core = 1.0 / (p.n as f64 * p.alpha) + p.beta;
    let spreading_epochs = p.c * core * core * ln_n * ln_n;
    let saturation_epochs = p.c * core * ln_n;
    Ok(EpochBound {
        steps: p.epoch_len * spreading_epochs,
        per_phase_steps: p.epoch_len * (spreading_epochs + saturation_epochs),
        spreading_epochs,
        saturation_epochs,
    })
}

/// Per-`n` phase medians and the saturation/spreading trend across a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseGroup {
    pub n: usize,
    pub runs: usize,
    pub median_spreading: Option<f64>,
    pub median_saturation: Option<f64>,
    /// saturation / spreading at the medians.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub groups: Vec<PhaseGroup>,
    /// Whether the saturation share shrinks (or holds) as `n` grows, the
    /// expected one-log-factor-fewer behavior. `None` with fewer than two
    /// usable groups.
    pub saturation_ratio_nonincreasing: Option<bool>,
}

/// Aggregates spreading/saturation phase statistics, grouping runs by `n`.
pub fn phase_report(runs: &[FloodRun]) -> Result<PhaseReport, FloodError> {
    if runs.is_empty() {
        return Err(FloodError::NoRuns);
    }
    let mut ns: Vec<usize> = runs.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut groups = Vec::with_capacity(ns.len());
    for &n in &ns {
        let mut spreading: Vec<f64> = Vec::new();
        let mut saturation: Vec<f64> = Vec::new();
        let mut count = 0usize;
        for r in runs.iter().filter(|r| r.n == n) {
            count += 1;
            if let Some(s) = r.spreading_time {
                spreading.push(s as f64);
            }
            if let Some(s) = r.saturation_time() {
                saturation.push(s as f64);
            }
        }
        let ms = median(&mut spreading);
        let msat = median(&mut saturation);
        let ratio = match (ms, msat) {
            (Some(s), Some(t)) if s > 0.0 => Some(t / s),
            _ => None,
        };
        groups.push(PhaseGroup {
            n,
            runs: count,
            median_spreading: ms,
            median_saturation: msat,
            ratio,
        });
    }
    let ratios: Vec<f64> = groups.iter().filter_map(|g| g.ratio).collect();
    let trend = if ratios.len() >= 2 {
        // Allow a small tolerance: medians are integer-valued and noisy.
        Some(ratios.windows(2).all(|w| w[1] <= w[0] * 1.25))
    } else {
        None
    };
    Ok(PhaseReport {
        groups,
        saturation_ratio_nonincreasing: trend,
    })
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(xs[(xs.len() - 1) / 2])
}
