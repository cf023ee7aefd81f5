//! The experiment pipeline: per sweep point, build the model, evaluate every
//! applicable bound from its analytics, measure flooding, run the
//! stationarity estimators, and assemble one result record. All randomness
//! flows through seeds derived from the config, so outputs are bit-identical
//! across runs and worker counts.

use anyhow::{Context, Result};
use serde::Serialize;

use megsim::dynamic::{
    default_set_sizes, estimate_alpha, estimate_beta, AlphaEstimate, BetaEstimate, EstimatorConfig,
    MegProcess,
};
use megsim::edge_meg::{edge_meg_bound, two_state_comparator};
use megsim::flooding::{epoch_bound, flooding_time_stats, BoundParams, FloodStats};
use megsim::mobility::{
    geometric_bound, path_family_bound, uniformity_check, walk_bound, PositionalProfile,
};
use megsim::node_meg::ConnectionMap;

use crate::config::{EpochPolicy, ExperimentConfig};
use crate::model::{build_model, BuiltModel, ModelKind};

/// Analytic values computed before any simulation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundSet {
    pub alpha_analytic: Option<f64>,
    pub p_nm: Option<f64>,
    pub p_nm2: Option<f64>,
    pub eta: Option<f64>,
    pub t_mix: Option<usize>,
    pub epoch_len: Option<usize>,
    pub bound_node_meg: Option<f64>,
    pub bound_edge: Option<f64>,
    pub bound_geometric: Option<f64>,
    pub bound_path_family: Option<f64>,
    pub bound_walk: Option<f64>,
    pub bound_comparator: Option<f64>,
    pub preconditions: Vec<String>,
}

/// A built model plus its analytic bound values.
pub struct ModelAnalysis {
    pub model_id: String,
    pub process: Box<dyn MegProcess>,
    pub kind: ModelKind,
    pub bounds: BoundSet,
    pub step_cap: usize,
    pub warnings: Vec<String>,
}

/// Builds the model at `n` and evaluates every bound whose preconditions
/// hold; refusals are recorded, not fatal.
pub fn analyze_sweep_point(cfg: &ExperimentConfig, n: usize) -> Result<ModelAnalysis> {
    let BuiltModel {
        process,
        kind,
        mut warnings,
    } = build_model(&cfg.model, n, cfg.seed)?;
    let model_id = process.model_id();
    let mut bounds = BoundSet::default();
    bounds.alpha_analytic = kind.alpha_analytic();

    bounds.epoch_len = match cfg.epoch {
        EpochPolicy::Explicit { explicit } => Some(explicit),
        EpochPolicy::Analytic => match &kind {
            ModelKind::Edge { spec, .. } => match spec.mixing() {
                Ok(m) => {
                    bounds.preconditions.push("epoch:edge-mixing".into());
                    Some(m.steps)
                }
                Err(e) => {
                    warnings.push(format!("edge mixing unavailable: {e}"));
                    None
                }
            },
            ModelKind::Node { nm, .. } => match nm.epoch_length(n) {
                Ok(m) => {
                    bounds.preconditions.push("epoch:analytic".into());
                    Some(m)
                }
                Err(e) => {
                    warnings.push(format!("analytic epoch unavailable: {e}"));
                    None
                }
            },
        },
    };

    match &kind {
        ModelKind::Edge { spec, rates } => {
            match edge_meg_bound(n, spec, cfg.bound_c) {
                Ok(b) => {
                    bounds.t_mix = Some(b.t_mix);
                    bounds.preconditions.push("edge:independent(beta=1)".into());
                    bounds.bound_edge = Some(b.steps);
                }
                Err(e) => warnings.push(format!("edge bound unavailable: {e}")),
            }
            if let Some((p, q)) = rates {
                bounds.bound_comparator = Some(two_state_comparator(n, *p)?);
                bounds
                    .preconditions
                    .push(format!("comparator:q>=np:{}", *q >= n as f64 * *p));
            }
        }
        ModelKind::Node {
            nm,
            family,
            graph_delta,
            waypoint,
        } => {
            bounds.p_nm = Some(nm.p_nm());
            bounds.p_nm2 = Some(nm.p_nm2());
            bounds.eta = nm.eta().ok();
            bounds.t_mix = nm.t_mix().ok().map(|m| m.steps);
            match nm.flooding_bound(n, cfg.bound_c) {
                Ok(b) => {
                    if b.warn_small_p_nm {
                        warnings.push(format!("P_NM = {} is below n^-6", b.p_nm));
                    }
                    bounds.preconditions.push("node-bound:ergodic+eta".into());
                    bounds.bound_node_meg = Some(b.steps);
                }
                Err(e) => warnings.push(format!("node bound unavailable: {e}")),
            }
            if let (Some((checks, points)), Some(tm)) = (family, bounds.t_mix) {
                match path_family_bound(checks, *points, tm, n, cfg.bound_c) {
                    Ok(v) => {
                        bounds.preconditions.push(format!(
                            "path-family:simple={}:reversible={}:delta={:.4}",
                            checks.simple, checks.reversible, checks.delta
                        ));
                        bounds.bound_path_family = Some(v);
                    }
                    Err(e) => bounds
                        .preconditions
                        .push(format!("path-family:refused({e})")),
                }
            }
            if let (Some(delta), Some((_, points)), Some(tm)) = (graph_delta, family, bounds.t_mix)
            {
                bounds.bound_walk = Some(walk_bound(*delta, *points, tm, n, cfg.bound_c));
                bounds
                    .preconditions
                    .push(format!("walk:graph-delta={delta:.4}"));
            }
            if let (Some(info), Some(tm)) = (waypoint, bounds.t_mix) {
                if let ConnectionMap::WithinRadius { geom, .. } = nm.connection() {
                    let profile = PositionalProfile {
                        weights: nm.locus_marginal().to_vec(),
                        geom: geom.clone(),
                    };
                    let chk = uniformity_check(&profile, info.radius);
                    match geometric_bound(&chk, tm, n, info.radius, cfg.bound_c) {
                        Ok(v) => {
                            bounds.preconditions.push(format!(
                                "geometric:delta={:.4}:lambda={:.4}:r/cell={:.2}",
                                chk.delta, chk.lambda, info.radius_over_cell
                            ));
                            bounds.bound_geometric = Some(v);
                        }
                        Err(e) => bounds.preconditions.push(format!("geometric:refused({e})")),
                    }
                }
            }
        }
    }

    // Step cap: explicit, else 100× the headline bound, else 10^6.
    let headline = bounds.bound_edge.or(bounds.bound_node_meg);
    let step_cap = cfg.step_cap.unwrap_or_else(|| {
        headline
            .map(|b| ((100.0 * b) as usize).clamp(1000, 20_000_000))
            .unwrap_or(1_000_000)
    });

    Ok(ModelAnalysis {
        model_id,
        process,
        kind,
        bounds,
        step_cap,
        warnings,
    })
}

/// One flattened row of the records CSV.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub model_id: String,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub epoch_len: Option<usize>,
    pub step_cap: usize,

    pub flood_median: Option<f64>,
    pub flood_mean: Option<f64>,
    pub flood_q90: Option<f64>,
    pub flood_whp: Option<f64>,
    pub timeout_rate: f64,
    pub spreading_mean: Option<f64>,
    pub saturation_mean: Option<f64>,

    pub alpha_hat: Option<f64>,
    pub alpha_radius: Option<f64>,
    pub beta_hat: Option<f64>,
    pub beta_radius: Option<f64>,

    pub alpha_analytic: Option<f64>,
    pub p_nm: Option<f64>,
    pub p_nm2: Option<f64>,
    pub eta: Option<f64>,
    pub t_mix: Option<usize>,

    pub bound_epoch: Option<f64>,
    pub bound_node_meg: Option<f64>,
    pub bound_edge: Option<f64>,
    pub bound_geometric: Option<f64>,
    pub bound_path_family: Option<f64>,
    pub bound_walk: Option<f64>,
    pub bound_comparator: Option<f64>,
    pub ratio_median_over_bound: Option<f64>,
    pub preconditions: String,
    pub warnings: String,
}

pub struct SweepOutcome {
    pub record: ResultRecord,
    pub stats: FloodStats,
    pub alpha: Option<AlphaEstimate>,
    pub beta: Option<BetaEstimate>,
}

/// Full pipeline at one sweep point: analytics, flooding, estimators.
pub fn run_sweep_point(cfg: &ExperimentConfig, n: usize) -> Result<SweepOutcome> {
    let analysis = analyze_sweep_point(cfg, n)?;
    let ModelAnalysis {
        model_id,
        process,
        kind: _kind,
        bounds,
        step_cap,
        mut warnings,
    } = analysis;

    let stats = flooding_time_stats(
        process.as_ref(),
        &cfg.sources.to_selection(),
        cfg.trials,
        step_cap,
        cfg.seed,
    )
    .context("flooding")?;
    if stats.all_timed_out {
        warnings.push("every flooding run timed out".into());
    }

    let (mut alpha, mut beta) = (None, None);
    if cfg.estimators.enabled {
        if let Some(m) = bounds.epoch_len {
            let est_cfg = EstimatorConfig {
                burn_in_epochs: cfg.estimators.burn_in_epochs,
                samples_per_trial: cfg.estimators.samples_per_trial,
            };
            alpha = Some(estimate_alpha(
                process.as_ref(),
                m,
                &est_cfg,
                cfg.estimators.trials,
                cfg.seed,
            ));
            let sizes = cfg
                .estimators
                .beta_sizes(n)
                .unwrap_or_else(|| default_set_sizes(n));
            beta = Some(estimate_beta(
                process.as_ref(),
                m,
                &sizes,
                &est_cfg,
                cfg.estimators.trials,
                cfg.seed,
            ));
        } else {
            warnings.push("estimators skipped: no epoch length".into());
        }
    }

    let bound_epoch = match (&alpha, &beta, bounds.epoch_len) {
        (Some(a), Some(b), Some(m)) if a.value > 0.0 && b.value.is_finite() => {
            epoch_bound(&BoundParams {
                epoch_len: m as f64,
                alpha: a.value,
                beta: b.value,
                n,
                c: cfg.bound_c,
            })
            .ok()
            .map(|t| t.steps)
        }
        _ => None,
    };

    let headline = bounds.bound_edge.or(bounds.bound_node_meg);
    let flood_median = stats.pooled.median;
    let record = ResultRecord {
        schema_version: cfg.schema_version,
        config_hash: cfg.config_hash(),
        model_id,
        n,
        seed: cfg.seed,
        trials: cfg.trials,
        epoch_len: bounds.epoch_len,
        step_cap,
        flood_median,
        flood_mean: stats.pooled.mean_finite,
        flood_q90: stats.pooled.q90,
        flood_whp: stats.pooled.q_whp,
        timeout_rate: stats.timeout_rate,
        spreading_mean: stats.mean_spreading,
        saturation_mean: stats.mean_saturation,
        alpha_hat: alpha.as_ref().map(|a| a.value),
        alpha_radius: alpha.as_ref().map(|a| a.radius),
        beta_hat: beta.as_ref().map(|b| b.value),
        beta_radius: beta.as_ref().map(|b| b.radius),
        alpha_analytic: bounds.alpha_analytic,
        p_nm: bounds.p_nm,
        p_nm2: bounds.p_nm2,
        eta: bounds.eta,
        t_mix: bounds.t_mix,
        bound_epoch,
        bound_node_meg: bounds.bound_node_meg,
        bound_edge: bounds.bound_edge,
        bound_geometric: bounds.bound_geometric,
        bound_path_family: bounds.bound_path_family,
        bound_walk: bounds.bound_walk,
        bound_comparator: bounds.bound_comparator,
        ratio_median_over_bound: match (flood_median, headline) {
            (Some(m), Some(b)) if b > 0.0 => Some(m / b),
            _ => None,
        },
        preconditions: bounds.preconditions.join(";"),
        warnings: warnings.join(";"),
    };
    Ok(SweepOutcome {
        record,
        stats,
        alpha,
        beta,
    })
}
