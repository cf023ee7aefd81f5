//! The abstract Markovian-evolving-graph contract: snapshots, the process
//! trait, trace export, subset statistics, and the epoch-level stationarity
//! estimators.

mod estimate;
mod snapshot;
mod stats;
mod trace;

pub(crate) use estimate::run_trials;
#[cfg(test)]
pub(crate) use estimate::tri_index;
pub use estimate::{
    contact_event_exponent, default_set_sizes, degree_event_bound, estimate_alpha, estimate_beta,
    estimate_stationarity, expansion_event_bound, expansion_event_threshold, spread_event_exponent,
    verify_expansion_events, AlphaEstimate, BetaEstimate, BetaPoint, EstimatorConfig, EventCheck,
    EventVerdict, ExpansionConfig, ExpansionReport, StationarityEstimate,
};
pub use snapshot::{NodeSet, Snapshot};
pub use stats::{degree_into, epoch_contact, expansion, spread, StatsError};
pub use trace::{read_trace, write_trace};

use rand::RngCore;

/// A dynamic graph process: a sequence of random edge sets over `[n]`.
///
/// `reset` draws a fresh initial configuration from the model's initial
/// distribution; `advance_into` performs one time step and materializes the
/// snapshot. Identical seeds reproduce identical snapshot sequences, so the
/// process owns no hidden randomness.
pub trait MegProcess: Send + Sync {
    fn node_count(&self) -> usize;

    /// Reinitializes internal state from the model's initial distribution.
    fn reset(&mut self, rng: &mut dyn RngCore);

    /// Advances one step and writes `E_{t+1}` into `out` (cleared first).
    fn advance_into(&mut self, rng: &mut dyn RngCore, out: &mut Snapshot);

    /// Advances one step without materializing the snapshot; used for
    /// burn-in. The default simply discards a scratch snapshot.
    fn advance_silent(&mut self, rng: &mut dyn RngCore) {
        let mut scratch = Snapshot::empty(self.node_count());
        self.advance_into(rng, &mut scratch);
    }

    /// Allocating convenience form of [`MegProcess::advance_into`].
    fn advance(&mut self, rng: &mut dyn RngCore) -> Snapshot {
        let mut out = Snapshot::empty(self.node_count());
        self.advance_into(rng, &mut out);
        out
    }

    /// Whether every unordered node pair has the same edge-indicator law
    /// (true for node- and edge-driven models with identical per-unit
    /// initialization); lets estimators pool pairs into one estimate.
    fn pairs_exchangeable(&self) -> bool {
        false
    }

    /// Whether distinct edges evolve independently (edge-driven models);
    /// lets estimators use the full pair count as the effective sample size.
    fn edges_independent(&self) -> bool {
        false
    }

    /// A short stable identifier for seed derivation and reports.
    fn model_id(&self) -> String {
        "meg".into()
    }

    /// Fresh instance with identical definition and reset-equivalent state,
    /// for one-instance-per-worker parallelism.
    fn clone_process(&self) -> Box<dyn MegProcess>;
}

/// A constant dynamic graph: every snapshot equals a fixed graph. Useful as
/// a degenerate MEG for oracles and calibration.
#[derive(Clone)]
pub struct StaticMeg {
    snapshot: Snapshot,
    label: String,
}

impl StaticMeg {
    pub fn new(snapshot: Snapshot) -> Self {
        Self {
            snapshot,
            label: "static".into(),
        }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            snapshot: Snapshot::complete(n),
            label: format!("static-complete-{n}"),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            snapshot: Snapshot::empty(n),
            label: format!("static-empty-{n}"),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut s = Snapshot::empty(n);
        for &(i, j) in edges {
            s.add_edge(i, j);
        }
        Self {
            snapshot: s,
            label: format!("static-{n}"),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }
}

impl MegProcess for StaticMeg {
    fn node_count(&self) -> usize {
        self.snapshot.node_count()
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) {}

    fn advance_into(&mut self, _rng: &mut dyn RngCore, out: &mut Snapshot) {
        out.clone_from(&self.snapshot);
    }

    fn pairs_exchangeable(&self) -> bool {
        false
    }

    fn model_id(&self) -> String {
        self.label.clone()
    }

    fn clone_process(&self) -> Box<dyn MegProcess> {
        Box::new(self.clone())
    }
}
