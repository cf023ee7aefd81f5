//! Discretized random waypoint over a grid square.
//!
//! A node repeatedly picks a uniform destination point and a uniform speed
//! from a quantized range, then travels in a straight line: the ideal
//! continuous position advances `v` per step along the segment, and the
//! occupied grid point is the nearest one to the ideal position (this keeps
//! the chain finite without stair-stepping artifacts). On arrival the next
//! destination and speed are drawn immediately.
//!
//! The chain state encodes (origin, destination, speed, step-within-trip);
//! states are laid out trip-major with a prefix-sum index, so chains with
//! millions of states are simulated without materializing rows. Two nodes
//! are connected when their grid points are within the transmission radius.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::MobilityError;
use crate::markov::{KernelModel, TransitionKernel};
use crate::node_meg::{
    AnalyticsConfig, ConnectionMap, GridGeometry, InitMode, NodeMeg, PointProjection,
};

/// Desk-scale cap on the trip-chain state count (the per-state point table
/// is the limiting allocation).
pub const MAX_WAYPOINT_STATES: u64 = 16_000_000;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct WaypointConfig {
    /// Grid resolution: points per side.
    pub m: usize,
    /// Side length of the square, in distance units.
    pub side: f64,
    /// Transmission radius.
    pub radius: f64,
    /// Speed range, distance per step; speeds are quantized to the grid
    /// cell size within this range.
    pub v_min: f64,
    pub v_max: f64,
}

impl WaypointConfig {
    /// Default resolution rule: cell size at most `min(radius, v_min) / 2`.
    pub fn with_default_resolution(side: f64, radius: f64, v_min: f64, v_max: f64) -> Self {
        let scale = radius.min(v_min).max(1e-9);
        let m = ((2.0 * side / scale).ceil() as usize + 1).max(2);
        Self {
            m,
            side,
            radius,
            v_min,
            v_max,
        }
    }

    fn validate(&self) -> Result<Vec<String>, MobilityError> {
        if self.m < 2 {
            return Err(MobilityError::BadWaypoint("need m ≥ 2".into()));
        }
        if !self.side.is_finite() || self.side <= 0.0 {
            return Err(MobilityError::BadWaypoint("side must be positive".into()));
        }
        if !(self.v_min > 0.0 && self.v_min <= self.v_max) {
            return Err(MobilityError::BadWaypoint(format!(
                "need 0 < v_min ≤ v_max, got [{}, {}]",
                self.v_min, self.v_max
            )));
        }
        if self.radius < 0.0 {
            return Err(MobilityError::BadWaypoint("negative radius".into()));
        }
        let diag = self.side * 2f64.sqrt();
        if self.radius > diag + 1e-9 {
            return Err(MobilityError::BadWaypoint(format!(
                "radius {} exceeds the square diagonal {diag}",
                self.radius
            )));
        }
        if self.v_min > diag + 1e-9 {
            return Err(MobilityError::BadWaypoint(format!(
                "speed {} exceeds the square diagonal {diag}",
                self.v_min
            )));
        }
        let mut warnings = Vec::new();
        if self.v_max / self.v_min > 4.0 {
            warnings.push(format!(
                "v_max/v_min = {:.2} is far from a constant ratio",
                self.v_max / self.v_min
            ));
        }
        let cell = self.side / (self.m as f64 - 1.0);
        if cell > self.radius.min(self.v_min) / 2.0 + 1e-12 {
            warnings.push(format!(
                "cell size {cell:.4} above the recommended min(r, v)/2 resolution"
            ));
        }
        Ok(warnings)
    }
}

/// The trip chain: state = (origin, destination, speed index, step k).
pub struct WaypointChain {
    geom: GridGeometry,
    speeds: Vec<f64>,
    /// Prefix sums of trip lengths; trip `t` owns states
    /// `offsets[t] .. offsets[t + 1]`.
    trip_offsets: Vec<u64>,
    states: usize,
    label: String,
}

impl WaypointChain {
    fn point_count(&self) -> usize {
        self.geom.point_count()
    }

    #[inline]
    fn trip_of(&self, o: usize, d: usize, speed_idx: usize) -> usize {
        (o * self.point_count() + d) * self.speeds.len() + speed_idx
    }

    #[inline]
    fn trip_parts(&self, trip: usize) -> (usize, usize, usize) {
        let s = trip % self.speeds.len();
        let od = trip / self.speeds.len();
        (od / self.point_count(), od % self.point_count(), s)
    }

    /// `(trip, k)` with `k ∈ 1..=len(trip)`.
    pub fn decode(&self, state: usize) -> (usize, u64) {
        let idx = self.trip_offsets.partition_point(|&o| o <= state as u64) - 1;
        (idx, state as u64 - self.trip_offsets[idx] + 1)
    }

    fn trip_len(&self, trip: usize) -> u64 {
        self.trip_offsets[trip + 1] - self.trip_offsets[trip]
    }

    /// Grid point occupied at a state: nearest point to the ideal position
    /// `k·v` along the origin→destination segment.
    pub fn position_of(&self, state: usize) -> usize {
        let (trip, k) = self.decode(state);
        let (o, d, s) = self.trip_parts(trip);
        let (ox, oy) = self.geom.coords(o);
        let (dx, dy) = self.geom.coords(d);
        let dist = ((dx - ox).powi(2) + (dy - oy).powi(2)).sqrt();
        if dist == 0.0 {
            return o;
        }
        let t = (k as f64 * self.speeds[s]).min(dist) / dist;
        self.geom
            .nearest_point(ox + (dx - ox) * t, oy + (dy - oy) * t)
    }
}

impl KernelModel for WaypointChain {
    fn state_count(&self) -> usize {
        self.states
    }

    fn successors(&self, state: usize, visit: &mut dyn FnMut(usize, f64)) {
        let (trip, k) = self.decode(state);
        if k < self.trip_len(trip) {
            visit(state + 1, 1.0);
            return;
        }
        // Arrived: uniform fresh destination and speed from the new origin.
        let (_, d, _) = self.trip_parts(trip);
        let choices = (self.point_count() * self.speeds.len()) as f64;
        let p = 1.0 / choices;
        for nd in 0..self.point_count() {
            for ns in 0..self.speeds.len() {
                visit(self.trip_offsets[self.trip_of(d, nd, ns)] as usize, p);
            }
        }
    }

    fn sample_next(&self, state: usize, rng: &mut dyn RngCore) -> usize {
        let (trip, k) = self.decode(state);
        if k < self.trip_len(trip) {
            return state + 1;
        }
        let (_, d, _) = self.trip_parts(trip);
        let nd = rng.random_range(0..self.point_count());
        let ns = rng.random_range(0..self.speeds.len());
        self.trip_offsets[self.trip_of(d, nd, ns)] as usize
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// A built waypoint model with its discretization metadata.
pub struct WaypointModel {
    pub node_meg: NodeMeg,
    pub geometry: GridGeometry,
    pub cell: f64,
    pub speeds: Vec<f64>,
    pub states: usize,
    pub trips: usize,
    pub radius_over_cell: f64,
    pub warnings: Vec<String>,
}

/// Builds the waypoint node-MEG over `n` nodes.
pub fn build_random_waypoint(
    cfg: &WaypointConfig,
    n: usize,
    acfg: &AnalyticsConfig,
) -> Result<WaypointModel, MobilityError> {
    let warnings = cfg.validate()?;
    let geom = GridGeometry::square(cfg.m, cfg.side);
    let cell = geom.cell;

    // Quantized speed set: v_min plus whole cells, capped by v_max.
    let mut speeds = vec![cfg.v_min];
    let mut v = cfg.v_min + cell;
    while v <= cfg.v_max + 1e-12 {
        speeds.push(v);
        v += cell;
    }

    let points = geom.point_count();
    let trips = points * points * speeds.len();
    let mut offsets = Vec::with_capacity(trips + 1);
    offsets.push(0u64);
    for o in 0..points {
        let (ox, oy) = geom.coords(o);
        for d in 0..points {
            let (dx, dy) = geom.coords(d);
            let dist = ((dx - ox).powi(2) + (dy - oy).powi(2)).sqrt();
            for &speed in &speeds {
                let steps = ((dist / speed) - 1e-9).ceil().max(1.0) as u64;
                offsets.push(offsets.last().unwrap() + steps);
            }
        }
    }
    let states = *offsets.last().unwrap();
    if states > MAX_WAYPOINT_STATES {
        return Err(MobilityError::TooManyStates {
            states,
            cap: MAX_WAYPOINT_STATES,
        });
    }
    let chain = WaypointChain {
        geom: geom.clone(),
        speeds: speeds.clone(),
        trip_offsets: offsets,
        states: states as usize,
        label: format!("waypoint(m={}, L={}, r={})", cfg.m, cfg.side, cfg.radius),
    };
    let point_of: Vec<u32> = (0..chain.states)
        .map(|s| chain.position_of(s) as u32)
        .collect();
    let label = chain.label.clone();
    let kernel = TransitionKernel::from_model(Arc::new(chain))
        .map_err(crate::node_meg::NodeMegError::from)?;
    let proj =
        PointProjection::new(point_of, points).map_err(crate::node_meg::NodeMegError::from)?;
    let connection = ConnectionMap::WithinRadius {
        proj,
        geom: geom.clone(),
        radius: cfg.radius,
    };
    let node_meg = NodeMeg::with_label(n, kernel, connection, InitMode::Stationary, acfg, label)?;
    Ok(WaypointModel {
        node_meg,
        geometry: geom,
        cell,
        speeds,
        states: states as usize,
        trips,
        radius_over_cell: cfg.radius / cell,
        warnings,
    })
}
