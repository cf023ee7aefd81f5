//! Positional profiles and the geometric uniformity conditions that convert
//! single-node position statistics into flooding-time bounds.
//!
//! For a geometric model over a region discretized by a grid, the two
//! conditions are: (a) the positional density is at most `δ / vol(R)`
//! everywhere, and (b) some sub-region `B` carrying density at least
//! `1 / (δ·vol(R))` keeps a margin of the transmission radius inside
//! itself with volume at least `λ·vol(R)`. Volumes are computed by point
//! counting (points × cell volume); the least workable `(δ, λ)` pair is
//! found by a deterministic scan over log-spaced candidates.

use serde::Serialize;

use super::{FamilyChecks, MobilityError};
use crate::node_meg::{ConnectionMap, GridGeometry, NodeMeg};

/// Stationary position weights over the points of a grid region.
#[derive(Debug, Clone, Serialize)]
pub struct PositionalProfile {
    pub weights: Vec<f64>,
    pub geom: GridGeometry,
}

/// The positional marginal of a geometric node-MEG (grid-based connection).
pub fn positional_profile(nm: &NodeMeg) -> Result<PositionalProfile, MobilityError> {
    match nm.connection() {
        ConnectionMap::WithinRadius { geom, .. } => Ok(PositionalProfile {
            weights: nm.locus_marginal().to_vec(),
            geom: geom.clone(),
        }),
        _ => Err(MobilityError::PreconditionFailed(
            "model has no grid geometry; use the locus marginal directly".into(),
        )),
    }
}

/// Outcome of the geometric uniformity check.
#[derive(Debug, Clone, Serialize)]
pub struct UniformityCheck {
    pub feasible: bool,
    /// Chosen density-regularity constant (≥ 1, and ≥ the density max).
    pub delta: f64,
    /// Covered-volume fraction `vol(B_r)/vol(R)` at the chosen `δ`.
    pub lambda: f64,
    /// Least `δ` satisfying the density upper bound alone.
    pub delta_density: f64,
    pub vol_region: f64,
    pub cell_vol: f64,
    pub b_points: usize,
    pub br_points: usize,
    pub dim: u32,
}

/// Finds the least workable `(δ, λ)`: scans log-spaced `δ` candidates from
/// the density bound upward, evaluates `B = {u : F(u) ≥ 1/(δN)}` and its
/// radius-eroded core `B_r`, and keeps the candidate minimizing `δ⁶/λ²`
/// (the dependence constant the bound pays). Deterministic.
pub fn uniformity_check(profile: &PositionalProfile, radius: f64) -> UniformityCheck {
    let geom = &profile.geom;
    let f = &profile.weights;
    let n_points = geom.point_count();
    let cell_vol = geom.cell * geom.cell;
    let vol_region = n_points as f64 * cell_vol;
    let delta_density = f
        .iter()
        .fold(0.0f64, |acc, &w| acc.max(w * n_points as f64));
    let base = delta_density.max(1.0);

    let mut best: Option<(f64, f64, usize, usize)> = None;
    let candidates = 81;
    for k in 0..candidates {
        // base .. base·10^4, log-spaced.
        let delta = base * 10f64.powf(4.0 * k as f64 / (candidates - 1) as f64);
        let threshold = 1.0 / (delta * n_points as f64) - 1e-15;
        let in_b: Vec<bool> = f.iter().map(|&w| w >= threshold).collect();
        let b_points = in_b.iter().filter(|&&b| b).count();
        if b_points == 0 {
            continue;
        }
        let mut br_points = 0usize;
        for u in 0..n_points {
            if !in_b[u] {
                continue;
            }
            if !geom.disk_inside_region(u, radius) {
                continue;
            }
            if geom.disk(u, radius).iter().all(|&w| in_b[w as usize]) {
                br_points += 1;
            }
        }
        if br_points == 0 {
            continue;
        }
        let lambda = br_points as f64 / n_points as f64;
        let score = delta.powi(6) / (lambda * lambda);
        if best.is_none_or(|(bd, bl, _, _)| score < bd.powi(6) / (bl * bl)) {
            best = Some((delta, lambda, b_points, br_points));
        }
    }
    match best {
        Some((delta, lambda, b_points, br_points)) => UniformityCheck {
            feasible: true,
            delta,
            lambda,
            delta_density,
            vol_region,
            cell_vol,
            b_points,
            br_points,
            dim: 2,
        },
        None => UniformityCheck {
            feasible: false,
            delta: f64::NAN,
            lambda: 0.0,
            delta_density,
            vol_region,
            cell_vol,
            b_points: 0,
            br_points: 0,
            dim: 2,
        },
    }
}

/// Geometric-model flooding bound:
/// `c · T_mix · (δ²·vol(R)/(λ·n·r^d) + δ⁶/λ²)² · (ln n)³`.
pub fn geometric_bound(
    chk: &UniformityCheck,
    t_mix: usize,
    n: usize,
    radius: f64,
    c: f64,
) -> Result<f64, MobilityError> {
    if !chk.feasible {
        return Err(MobilityError::PreconditionFailed(
            "geometric uniformity conditions not met (no workable δ, λ)".into(),
        ));
    }
    if radius <= 0.0 {
        return Err(MobilityError::PreconditionFailed(
            "transmission radius must be positive for the volume term".into(),
        ));
    }
    let ln_n = (n as f64).ln();
    let r_d = radius.powi(chk.dim as i32);
    let core = chk.delta * chk.delta * chk.vol_region / (chk.lambda * n as f64 * r_d)
        + chk.delta.powi(6) / (chk.lambda * chk.lambda);
    Ok(c * t_mix as f64 * core * core * ln_n * ln_n * ln_n)
}

/// Random-path flooding bound for simple + reversible `δ`-regular families:
/// `c · T_mix · (|V|/n + δ³)² · (ln n)³`.
pub fn path_family_bound(
    checks: &FamilyChecks,
    points: usize,
    t_mix: usize,
    n: usize,
    c: f64,
) -> Result<f64, MobilityError> {
    if !checks.simple || !checks.reversible {
        return Err(MobilityError::PreconditionFailed(format!(
            "family must be simple and reversible (simple = {}, reversible = {})",
            checks.simple, checks.reversible
        )));
    }
    let ln_n = (n as f64).ln();
    let core = points as f64 / n as f64 + checks.delta.powi(3);
    Ok(c * t_mix as f64 * core * core * ln_n * ln_n * ln_n)
}

/// Random-walk flooding bound over a degree-`δ`-regular graph:
/// `c · T_mix · (δ²|V|/n + δ⁷)² · (ln n)³`.
pub fn walk_bound(graph_delta: f64, points: usize, t_mix: usize, n: usize, c: f64) -> f64 {
    let ln_n = (n as f64).ln();
    let core = graph_delta * graph_delta * points as f64 / n as f64 + graph_delta.powi(7);
    c * t_mix as f64 * core * core * ln_n * ln_n * ln_n
}
