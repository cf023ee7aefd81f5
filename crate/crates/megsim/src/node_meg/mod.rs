//! Node-driven Markovian evolving graphs `NM(n, chain, C)`: every node runs
//! an independent copy of one hidden chain, and a symmetric connection map
//! over chain states decides which pairs are linked at each step.
//!
//! Because nodes are exchangeable, the stationary probability `P_NM` that a
//! fixed pair is connected and the probability `P_NM2` that two fixed nodes
//! share a neighbor do not depend on the choice of nodes; both are computed
//! here from the chain's stationary distribution and the connection map,
//! exactly when the chain is small and from long-run occupancy otherwise.
//! The ratio `η = P_NM2 / P_NM²` (clamped below at 1) controls the pairwise
//! dependence of incident edges; the key guarantee checked by
//! [`NodeMeg::verify_pairwise_dependence`] is
//! `P(e_{i,A}·e_{j,A}) ≤ 17η · P(e_{i,A})·P(e_{j,A})` at stationarity.

mod connection;

pub use connection::{
    ConnMatrix, ConnectionError, ConnectionMap, GridGeometry, LocusView, PointProjection,
};

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Serialize;
use thiserror::Error;

use crate::dynamic::{MegProcess, Snapshot};
use crate::markov::{
    mixing_time_capped, mixing_time_projected, stationary_distribution, CdfSampler, Distribution,
    MarkovError, MixingResult, ProjectedMixingConfig, TransitionKernel, DEFAULT_MIXING_EPS,
    EXACT_STATE_CAP,
};
use crate::rng::trial_rng;

#[derive(Debug, Error)]
pub enum NodeMegError {
    #[error("kernel has {kernel} states but the connection map covers {map}")]
    StateCountMismatch { kernel: usize, map: usize },
    #[error("model has no edges at stationarity (P_NM = 0)")]
    NoEdges,
    #[error("chain is not ergodic: {0}")]
    NonErgodic(String),
    #[error("mixing time unavailable: {0}")]
    MixingUnavailable(String),
    #[error("initial distributions must cover {expected} nodes, got {got}")]
    BadInit { expected: usize, got: usize },
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

/// How node states are initialized on reset.
#[derive(Clone)]
pub enum InitMode {
    /// Every node drawn independently from the stationary distribution.
    /// Falls back to a recorded burn-in when only empirical analytics are
    /// available (chains too large for an exact solve).
    Stationary,
    /// Explicit per-node distributions (one entry shared by all, or n).
    Explicit(Vec<Distribution>),
    /// Uniform random state followed by this many silent steps.
    BurnIn(usize),
}

impl std::fmt::Debug for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitMode::Stationary => write!(f, "Stationary"),
            InitMode::Explicit(d) => write!(f, "Explicit({} dists)", d.len()),
            InitMode::BurnIn(s) => write!(f, "BurnIn({s})"),
        }
    }
}

/// Controls how the cached analytics are computed.
#[derive(Debug, Clone)]
pub struct AnalyticsConfig {
    /// State-count threshold for the exact stationary/mixing route.
    pub exact_state_cap: usize,
    pub mixing_eps: f64,
    pub mixing_step_cap: usize,
    /// Empirical occupancy: steps per segment and the locus-marginal
    /// stabilization tolerance between consecutive segments.
    pub occupancy_segment: usize,
    pub occupancy_tol: f64,
    pub occupancy_max_segments: usize,
    /// Walkers per probe start for the projected mixing estimate.
    pub mixing_walkers: usize,
    /// Stream seed for all analytics sampling.
    pub seed: u64,
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        Self {
            exact_state_cap: EXACT_STATE_CAP,
            mixing_eps: DEFAULT_MIXING_EPS,
            mixing_step_cap: 100_000,
            occupancy_segment: 250_000,
            occupancy_tol: 0.01,
            occupancy_max_segments: 16,
            mixing_walkers: 8192,
            seed: 0x616e_616c,
        }
    }
}

/// Where the stationary view came from.
#[derive(Debug, Clone, Serialize)]
pub enum PiSource {
    Exact,
    /// Long-run locus occupancy over this many post-burn-in steps.
    EmpiricalOccupancy {
        steps: u64,
    },
}

/// Cached analytic parameters of a node-driven model.
#[derive(Debug, Clone)]
pub struct NodeMegAnalytics {
    pub pi_source: PiSource,
    /// Exact stationary distribution over states, when available.
    pub pi: Option<Distribution>,
    /// Stationary marginal over loci.
    pub locus_view: LocusView,
    pub p_nm: f64,
    pub p_nm2: f64,
    /// Raw ratio `P_NM2 / P_NM²` (NaN when `P_NM = 0`).
    pub eta_ratio: f64,
    /// Mixing time at the configured threshold; `None` when mixing was not
    /// detected (periodic chains), with the reason in `notes`.
    pub t_mix: Option<MixingResult>,
    pub notes: Vec<String>,
}

struct Inner {
    n: usize,
    kernel: Arc<TransitionKernel>,
    connection: Arc<ConnectionMap>,
    init: InitMode,
    /// Resolved initialization actually used by `reset`.
    resolved_init: ResolvedInit,
    analytics: NodeMegAnalytics,
    label: String,
    exchangeable: bool,
}

enum ResolvedInit {
    StationaryExact(CdfSampler),
    Explicit(Vec<CdfSampler>),
    BurnIn(usize),
}

/// A node-driven MEG definition with cached analytics. Cheap to clone and
/// share; spawn simulation instances with [`NodeMeg::as_meg`].
#[derive(Clone)]
pub struct NodeMeg {
    inner: Arc<Inner>,
}

impl NodeMeg {
    pub fn new(
        n: usize,
        kernel: TransitionKernel,
        connection: ConnectionMap,
        init: InitMode,
        cfg: &AnalyticsConfig,
    ) -> Result<Self, NodeMegError> {
        Self::with_label(n, kernel, connection, init, cfg, "node_meg")
    }

    pub fn with_label(
        n: usize,
        kernel: TransitionKernel,
        connection: ConnectionMap,
        init: InitMode,
        cfg: &AnalyticsConfig,
        label: impl Into<String>,
    ) -> Result<Self, NodeMegError> {
        if n < 2 {
            return Err(NodeMegError::TooFewNodes(n));
        }
        let states = kernel.state_count();
        if states != connection.state_count() {
            return Err(NodeMegError::StateCountMismatch {
                kernel: states,
                map: connection.state_count(),
            });
        }
        if let InitMode::Explicit(dists) = &init {
            if dists.len() != 1 && dists.len() != n {
                return Err(NodeMegError::BadInit {
                    expected: n,
                    got: dists.len(),
                });
            }
            for d in dists {
                if d.len() != states {
                    return Err(NodeMegError::Markov(MarkovError::DomainMismatch {
                        left: d.len(),
                        right: states,
                    }));
                }
            }
        }
        let kernel = Arc::new(kernel);
        let connection = Arc::new(connection);
        let analytics = compute_analytics(&kernel, &connection, cfg)?;

        let mut analytics = analytics;
        let resolved_init = match &init {
            InitMode::Stationary => match &analytics.pi {
                Some(pi) => ResolvedInit::StationaryExact(CdfSampler::new(pi)),
                None => {
                    // Only empirical analytics: approximate the stationary
                    // start with a recorded burn-in sized by the mixing
                    // estimate.
                    let steps = analytics
                        .t_mix
                        .as_ref()
                        .map(|m| 10 * m.steps)
                        .unwrap_or(1000);
                    analytics.notes.push(format!(
                        "stationary start approximated by a burn-in of {steps} steps"
                    ));
                    ResolvedInit::BurnIn(steps)
                }
            },
            InitMode::Explicit(dists) => {
                ResolvedInit::Explicit(dists.iter().map(CdfSampler::new).collect())
            }
            InitMode::BurnIn(steps) => ResolvedInit::BurnIn(*steps),
        };
        let exchangeable = match &init {
            InitMode::Explicit(dists) => dists.len() == 1 || dists.windows(2).all(|w| w[0] == w[1]),
            _ => true,
        };
        Ok(Self {
            inner: Arc::new(Inner {
                n,
                kernel,
                connection,
                init,
                resolved_init,
                analytics,
                label: label.into(),
                exchangeable,
            }),
        })
    }

    pub fn node_count(&self) -> usize {
        self.inner.n
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.inner.kernel
    }

    pub fn connection(&self) -> &ConnectionMap {
        &self.inner.connection
    }

    pub fn init_mode(&self) -> &InitMode {
        &self.inner.init
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn analytics(&self) -> &NodeMegAnalytics {
        &self.inner.analytics
    }

    /// Stationary locus marginal (positions for mobility models).
    pub fn locus_marginal(&self) -> &[f64] {
        &self.inner.analytics.locus_view.f
    }

    /// `q(x)`: stationary probability that a fixed other node is connected
    /// to a node in state `x`.
    pub fn state_connect_prob(&self, state: usize) -> f64 {
        let locus = self.inner.connection.locus_of(state);
        self.inner.analytics.locus_view.q[locus]
    }

    pub fn p_nm(&self) -> f64 {
        self.inner.analytics.p_nm
    }

    pub fn p_nm2(&self) -> f64 {
        self.inner.analytics.p_nm2
    }

    /// Raw dependence ratio `P_NM2 / P_NM²`; errors when the model has no
    /// edges at stationarity.
    pub fn eta_ratio(&self) -> Result<f64, NodeMegError> {
        if self.inner.analytics.p_nm <= 0.0 {
            return Err(NodeMegError::NoEdges);
        }
        Ok(self.inner.analytics.eta_ratio)
    }

    /// Least `η ≥ 1` satisfying the pairwise-dependence hypothesis: the
    /// computed ratio clamped below at 1.
    pub fn eta(&self) -> Result<f64, NodeMegError> {
        Ok(self.eta_ratio()?.max(1.0))
    }

    /// Mixing time of the per-node chain.
    pub fn t_mix(&self) -> Result<&MixingResult, NodeMegError> {
        self.inner.analytics.t_mix.as_ref().ok_or_else(|| {
            NodeMegError::MixingUnavailable(
                self.inner.analytics.notes.join("; ").trim().to_string(),
            )
        })
    }

    /// Epoch length `M = ⌈T_mix · ln(2n / P_NM²)⌉` used by the epoch
    /// construction behind the node-model bound.
    pub fn epoch_length(&self, n: usize) -> Result<usize, NodeMegError> {
        if self.inner.analytics.p_nm <= 0.0 {
            return Err(NodeMegError::NoEdges);
        }
        Ok(epoch_length_steps(
            self.t_mix()?.steps,
            self.inner.analytics.p_nm,
            n,
        ))
    }

    /// Evaluates the node-model flooding-time bound
    /// `c · T_mix · (1/(n·P_NM) + η)² · (ln n)³`.
    pub fn flooding_bound(&self, n: usize, c: f64) -> Result<NodeMegBound, NodeMegError> {
        let p_nm = self.inner.analytics.p_nm;
        if p_nm <= 0.0 {
            return Err(NodeMegError::NoEdges);
        }
        let eta = self.eta()?;
        let t_mix = self.t_mix()?.steps;
        let ln_n = (n as f64).ln();
        let core = 1.0 / (n as f64 * p_nm) + eta;
        Ok(NodeMegBound {
            steps: c * t_mix as f64 * core * core * ln_n * ln_n * ln_n,
            t_mix,
            p_nm,
            eta,
            // The hypothesis asks P_NM ≥ 1/poly(n); warn at a fixed low
            // power since no constant is pinned at finite n.
            warn_small_p_nm: p_nm < (n as f64).powi(-6),
        })
    }

    /// A fresh simulation instance of this model.
    pub fn as_meg(&self) -> NodeMegProcess {
        NodeMegProcess {
            def: Arc::clone(&self.inner),
            states: vec![0; self.inner.n],
            buckets: Buckets::new(self.inner.connection.locus_count()),
        }
    }

    /// Checks the pairwise-dependence guarantee
    /// `P(e_{i,A}·e_{j,A}) ≤ 17η·P(e_{i,A})P(e_{j,A})` at stationarity:
    /// exactly (locus enumeration) when the locus domain is small, and by
    /// Monte Carlo with a 3σ-propagated radius.
    pub fn verify_pairwise_dependence(
        &self,
        set_sizes: &[usize],
        samples: usize,
        rng: &mut dyn RngCore,
    ) -> Result<PairwiseReport, NodeMegError> {
        let eta = self.eta()?;
        let view = &self.inner.analytics.locus_view;
        let loci = view.f.len();
        let mut entries = Vec::new();
        let locus_dist = Distribution::new(view.f.clone()).map_err(NodeMegError::Markov)?;
        let sampler = CdfSampler::new(&locus_dist);
        for &a in set_sizes {
            if loci <= 2048 {
                let joint = view.joint_contact_prob(a as u32);
                let single = view.contact_prob(a as u32);
                let product = single * single;
                let (ratio, pass, indeterminate) = if product > 0.0 {
                    let r = joint / product;
                    (Some(r), r <= 17.0 * eta + 1e-9, false)
                } else {
                    (None, true, true)
                };
                entries.push(PairwiseEntry {
                    set_size: a,
                    mode: PairwiseCheckMode::Exact,
                    joint,
                    product,
                    ratio,
                    limit: 17.0 * eta,
                    pass,
                    indeterminate,
                });
            }
            // Monte Carlo at stationarity: loci for i, j and each member of
            // A drawn independently from the stationary marginal.
            let mut hits_i = 0u64;
            let mut hits_j = 0u64;
            let mut hits_both = 0u64;
            let mut targets = vec![0usize; a];
            for _ in 0..samples {
                let u = sampler.sample(rng);
                let w = sampler.sample(rng);
                for t in targets.iter_mut() {
                    *t = sampler.sample(rng);
                }
                let ei = targets
                    .iter()
                    .any(|&z| self.inner.connection.loci_connect(u, z));
                let ej = targets
                    .iter()
                    .any(|&z| self.inner.connection.loci_connect(w, z));
                hits_i += ei as u64;
                hits_j += ej as u64;
                hits_both += (ei && ej) as u64;
            }
            let nf = samples as f64;
            let joint = hits_both as f64 / nf;
            let product = (hits_i as f64 / nf) * (hits_j as f64 / nf);
            if hits_i == 0 || hits_j == 0 || hits_both == 0 {
                entries.push(PairwiseEntry {
                    set_size: a,
                    mode: PairwiseCheckMode::MonteCarlo {
                        samples: samples as u64,
                        radius: f64::INFINITY,
                    },
                    joint,
                    product,
                    ratio: None,
                    limit: 17.0 * eta,
                    pass: true,
                    indeterminate: true,
                });
                continue;
            }
            let ratio = joint / product;
            let rel_var = (1.0 - joint) / hits_both as f64
                + (1.0 - hits_i as f64 / nf) / hits_i as f64
                + (1.0 - hits_j as f64 / nf) / hits_j as f64;
            let radius = 3.0 * ratio * rel_var.sqrt();
            entries.push(PairwiseEntry {
                set_size: a,
                mode: PairwiseCheckMode::MonteCarlo {
                    samples: samples as u64,
                    radius,
                },
                joint,
                product,
                ratio: Some(ratio),
                limit: 17.0 * eta,
                pass: ratio <= 17.0 * eta + radius,
                indeterminate: false,
            });
        }
        let all_pass = entries.iter().all(|e| e.pass);
        Ok(PairwiseReport {
            eta,
            entries,
            all_pass,
        })
    }
}

/// `M = ⌈T_mix · ln(2n / P_NM²)⌉` in steps, at least 1.
pub fn epoch_length_steps(t_mix: usize, p_nm: f64, n: usize) -> usize {
    let arg = 2.0 * n as f64 / (p_nm * p_nm);
    (t_mix as f64 * arg.ln()).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeMegBound {
    pub steps: f64,
    pub t_mix: usize,
    pub p_nm: f64,
    pub eta: f64,
    pub warn_small_p_nm: bool,
}

#[derive(Debug, Clone, Serialize)]
pub enum PairwiseCheckMode {
    Exact,
    MonteCarlo { samples: u64, radius: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseEntry {
    pub set_size: usize,
    pub mode: PairwiseCheckMode,
    pub joint: f64,
    pub product: f64,
    pub ratio: Option<f64>,
    /// `17η`; Monte Carlo entries additionally allow the sampling radius.
    pub limit: f64,
    pub pass: bool,
    pub indeterminate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseReport {
    pub eta: f64,
    pub entries: Vec<PairwiseEntry>,
    pub all_pass: bool,
}

fn compute_analytics(
    kernel: &Arc<TransitionKernel>,
    connection: &Arc<ConnectionMap>,
    cfg: &AnalyticsConfig,
) -> Result<NodeMegAnalytics, NodeMegError> {
    let states = kernel.state_count();
    let loci = connection.locus_count();
    let gamma = connection.locus_gamma();
    let mut notes = Vec::new();

    let (pi, locus_f, pi_source, t_mix) = if states <= cfg.exact_state_cap {
        let pi = stationary_distribution(kernel, 1e-10).map_err(|e| match e {
            MarkovError::NonErgodic(msg) => NodeMegError::NonErgodic(msg),
            MarkovError::NoConvergence { residual, .. } => NodeMegError::NonErgodic(format!(
                "stationary solve stalled at residual {residual:.3e}"
            )),
            other => NodeMegError::Markov(other),
        })?;
        let mut f = vec![0.0f64; loci];
        for (state, &w) in pi.weights().iter().enumerate() {
            f[connection.locus_of(state)] += w;
        }
        let t_mix = match mixing_time_capped(kernel, cfg.mixing_eps, cfg.mixing_step_cap) {
            Ok(m) => Some(m),
            Err(e) => {
                notes.push(format!("mixing not detected (chain may be periodic): {e}"));
                None
            }
        };
        (Some(pi), f, PiSource::Exact, t_mix)
    } else {
        // Long-run locus occupancy from one trajectory, run in segments
        // until the marginal stabilizes; the first segment is burn-in.
        let mut rng = trial_rng(cfg.seed, "node-meg-analytics", states, 0);
        let mut state = rng.random_range(0..states);
        let mut counts = vec![0u64; loci];
        let mut prev_segment: Option<Vec<f64>> = None;
        let mut kept_steps = 0u64;
        for segment in 0..cfg.occupancy_max_segments {
            let mut seg_counts = vec![0u64; loci];
            for _ in 0..cfg.occupancy_segment {
                state = kernel.sample_next(state, &mut rng);
                seg_counts[connection.locus_of(state)] += 1;
            }
            if segment == 0 {
                continue; // burn-in
            }
            let seg_f: Vec<f64> = seg_counts
                .iter()
                .map(|&c| c as f64 / cfg.occupancy_segment as f64)
                .collect();
            for (acc, c) in counts.iter_mut().zip(&seg_counts) {
                *acc += c;
            }
            kept_steps += cfg.occupancy_segment as u64;
            let stable = prev_segment
                .as_ref()
                .map(|prev| {
                    crate::markov::total_variation(prev, &seg_f).expect("same domain")
                        <= cfg.occupancy_tol
                })
                .unwrap_or(false);
            prev_segment = Some(seg_f);
            if stable {
                break;
            }
        }
        let f: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / kept_steps.max(1) as f64)
            .collect();
        notes.push(format!(
            "stationary view is empirical occupancy over {kept_steps} steps"
        ));

        // Projected mixing estimate from probe states at extreme loci.
        let mut probes = Vec::new();
        let argmax = f
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(u, _)| u)
            .unwrap_or(0);
        let argmin = f
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(u, _)| u)
            .unwrap_or(0);
        for target_locus in [0usize, argmax, argmin] {
            if let Some(state) = (0..states).find(|&s| connection.locus_of(s) == target_locus) {
                if !probes.contains(&state) {
                    probes.push(state);
                }
            }
        }
        let projection: Vec<u32> = (0..states).map(|s| connection.locus_of(s) as u32).collect();
        let t_mix = match mixing_time_projected(
            kernel,
            cfg.mixing_eps,
            &projection,
            &f,
            &probes,
            &ProjectedMixingConfig {
                walkers: cfg.mixing_walkers,
                cap: cfg.mixing_step_cap,
            },
            &mut rng,
        ) {
            Ok(m) => Some(m),
            Err(e) => {
                notes.push(format!("projected mixing estimate failed: {e}"));
                None
            }
        };
        (
            None,
            f,
            PiSource::EmpiricalOccupancy { steps: kept_steps },
            t_mix,
        )
    };

    let locus_view = LocusView::new(locus_f, gamma);
    let p_nm = locus_view.p_nm();
    let p_nm2 = locus_view.p_nm2();
    let eta_ratio = if p_nm > 0.0 {
        p_nm2 / (p_nm * p_nm)
    } else {
        f64::NAN
    };
    Ok(NodeMegAnalytics {
        pi_source,
        pi,
        locus_view,
        p_nm,
        p_nm2,
        eta_ratio,
        t_mix,
        notes,
    })
}

/// Per-locus node buckets reused across snapshot builds.
struct Buckets {
    by_locus: Vec<Vec<u32>>,
    occupied: Vec<u32>,
}

impl Buckets {
    fn new(loci: usize) -> Self {
        Self {
            by_locus: (0..loci).map(|_| Vec::new()).collect(),
            occupied: Vec::new(),
        }
    }

    fn rebuild(&mut self, connection: &ConnectionMap, states: &[usize]) {
        for &u in &self.occupied {
            self.by_locus[u as usize].clear();
        }
        self.occupied.clear();
        for (node, &state) in states.iter().enumerate() {
            let locus = connection.locus_of(state);
            if self.by_locus[locus].is_empty() {
                self.occupied.push(locus as u32);
            }
            self.by_locus[locus].push(node as u32);
        }
        self.occupied.sort_unstable();
    }
}

/// A running instance of a node-driven model.
pub struct NodeMegProcess {
    def: Arc<Inner>,
    states: Vec<usize>,
    buckets: Buckets,
}

impl NodeMegProcess {
    pub fn node_states(&self) -> &[usize] {
        &self.states
    }
}

impl MegProcess for NodeMegProcess {
    fn node_count(&self) -> usize {
        self.def.n
    }

    fn reset(&mut self, rng: &mut dyn RngCore) {
        match &self.def.resolved_init {
            ResolvedInit::StationaryExact(sampler) => {
                for s in &mut self.states {
                    *s = sampler.sample(rng);
                }
            }
            ResolvedInit::Explicit(samplers) => {
                for (node, s) in self.states.iter_mut().enumerate() {
                    let sampler = if samplers.len() == 1 {
                        &samplers[0]
                    } else {
                        &samplers[node]
                    };
                    *s = sampler.sample(rng);
                }
            }
            ResolvedInit::BurnIn(steps) => {
                let states = self.def.kernel.state_count();
                for s in &mut self.states {
                    *s = rng.random_range(0..states);
                }
                for _ in 0..*steps {
                    self.advance_states(rng);
                }
            }
        }
    }

    fn advance_into(&mut self, rng: &mut dyn RngCore, out: &mut Snapshot) {
        self.advance_states(rng);
        out.clear();
        self.buckets.rebuild(&self.def.connection, &self.states);
        let conn = &*self.def.connection;
        let view_gamma = &self.def.analytics.locus_view.gamma;
        for &u in &self.buckets.occupied {
            let u = u as usize;
            let here = &self.buckets.by_locus[u];
            for &w in &view_gamma[u] {
                let w = w as usize;
                if w < u {
                    continue;
                }
                let there = &self.buckets.by_locus[w];
                if there.is_empty() {
                    continue;
                }
                debug_assert!(conn.loci_connect(u, w));
                if w == u {
                    for (k, &i) in here.iter().enumerate() {
                        for &j in &here[k + 1..] {
                            out.add_edge(i as usize, j as usize);
                        }
                    }
                } else {
                    for &i in here {
                        for &j in there {
                            out.add_edge(i as usize, j as usize);
                        }
                    }
                }
            }
        }
    }

    fn advance_silent(&mut self, rng: &mut dyn RngCore) {
        self.advance_states(rng);
    }

    fn pairs_exchangeable(&self) -> bool {
        self.def.exchangeable
    }

    fn model_id(&self) -> String {
        format!("{}-n{}", self.def.label, self.def.n)
    }

    fn clone_process(&self) -> Box<dyn MegProcess> {
        Box::new(NodeMegProcess {
            def: Arc::clone(&self.def),
            states: vec![0; self.def.n],
            buckets: Buckets::new(self.def.connection.locus_count()),
        })
    }
}

impl NodeMegProcess {
    fn advance_states(&mut self, rng: &mut dyn RngCore) {
        let kernel = &self.def.kernel;
        for s in &mut self.states {
            *s = kernel.sample_next(*s, rng);
        }
    }
}
