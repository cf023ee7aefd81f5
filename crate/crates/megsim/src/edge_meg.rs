//! Edge-driven Markovian evolving graphs: every unordered pair evolves by an
//! independent copy of one hidden chain, and a projection `χ : S → {0, 1}`
//! decides whether the edge currently exists. Because edges are independent,
//! the pairwise-dependence parameter is exactly 1 for these models.
//!
//! The classic special case is the two-state chain with birth rate `p`
//! (off → on) and death rate `q` (on → off), whose stationary edge
//! probability is `p/(p+q)`.

use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::dynamic::{MegProcess, Snapshot};
use crate::markov::{
    mixing_time, stationary_distribution, CdfSampler, Distribution, MarkovError, MixingResult,
    TransitionKernel, DEFAULT_MIXING_EPS,
};

#[derive(Debug, Error)]
pub enum EdgeMegError {
    #[error("rate {name} = {value} outside (0, 1]")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("chi must assign one on/off value per state: {0} values for {1} states")]
    ChiLength(usize, usize),
    #[error("alpha = 0: no on-state carries stationary mass")]
    NoOnState,
    #[error("node count {0} exceeds the desk-scale cap {1} (per-edge state storage is O(n²))")]
    TooManyNodes(usize, usize),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Per-edge state storage caps desk-scale models at n ≈ 4096.
pub const MAX_NODES: usize = 4096;

/// The hidden chain an edge follows, with its on/off projection and initial
/// distribution (stationary by default, so epoch 0 is already stationary).
#[derive(Clone)]
pub struct EdgeChainSpec {
    kernel: Arc<TransitionKernel>,
    chi: Vec<bool>,
    init: Distribution,
    stationary: Distribution,
    alpha: f64,
    degenerate: bool,
}

impl EdgeChainSpec {
    /// Builds the spec and caches the stationary distribution and `α`.
    pub fn new(
        kernel: TransitionKernel,
        chi: Vec<bool>,
        init: Option<Distribution>,
    ) -> Result<Self, EdgeMegError> {
        if chi.len() != kernel.state_count() {
            return Err(EdgeMegError::ChiLength(chi.len(), kernel.state_count()));
        }
        let stationary = stationary_distribution(&kernel, 1e-12)?;
        let alpha: f64 = stationary
            .weights()
            .iter()
            .zip(&chi)
            .filter(|&(_, &on)| on)
            .map(|(&w, _)| w)
            .sum();
        let init = init.unwrap_or_else(|| stationary.clone());
        if init.len() != kernel.state_count() {
            return Err(EdgeMegError::Markov(MarkovError::DomainMismatch {
                left: init.len(),
                right: kernel.state_count(),
            }));
        }
        Ok(Self {
            kernel: Arc::new(kernel),
            chi,
            init,
            stationary,
            alpha,
            degenerate: alpha == 0.0,
        })
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn chi(&self) -> &[bool] {
        &self.chi
    }

    pub fn stationary(&self) -> &Distribution {
        &self.stationary
    }

    /// True when no on-state carries stationary mass.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Stationary probability that an edge exists: `Σ_{x : χ(x)=1} π(x)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Mixing time of the hidden chain at the conventional threshold.
    pub fn mixing(&self) -> Result<MixingResult, MarkovError> {
        mixing_time(&self.kernel, DEFAULT_MIXING_EPS)
    }
}

/// `EM(n, chain, χ)`: an independent copy of the hidden chain per pair.
pub struct EdgeMeg {
    n: usize,
    spec: Arc<EdgeChainSpec>,
    /// One shared initial sampler, or one per edge in pair-rank order.
    init_samplers: Arc<Vec<CdfSampler>>,
    states: Vec<u16>,
    label: String,
}

impl EdgeMeg {
    pub fn new(n: usize, spec: EdgeChainSpec) -> Result<Self, EdgeMegError> {
        Self::with_edge_inits(n, spec, None)
    }

    /// Like [`EdgeMeg::new`] with an explicit initial distribution per edge
    /// (pair-rank order, `n(n−1)/2` entries). The kernel stays shared.
    pub fn with_edge_inits(
        n: usize,
        spec: EdgeChainSpec,
        edge_inits: Option<Vec<Distribution>>,
    ) -> Result<Self, EdgeMegError> {
        if n > MAX_NODES {
            return Err(EdgeMegError::TooManyNodes(n, MAX_NODES));
        }
        assert!(
            spec.kernel.state_count() <= u16::MAX as usize,
            "per-edge chains larger than u16 are not desk scale"
        );
        let pairs = n * (n - 1) / 2;
        let samplers = match edge_inits {
            None => vec![CdfSampler::new(&spec.init)],
            Some(inits) => {
                if inits.len() != pairs {
                    return Err(EdgeMegError::Markov(MarkovError::DomainMismatch {
                        left: inits.len(),
                        right: pairs,
                    }));
                }
                for d in &inits {
                    if d.len() != spec.kernel.state_count() {
                        return Err(EdgeMegError::Markov(MarkovError::DomainMismatch {
                            left: d.len(),
                            right: spec.kernel.state_count(),
                        }));
                    }
                }
                inits.iter().map(CdfSampler::new).collect()
            }
        };
        let label = spec
            .kernel
            .label()
            .map(|l| format!("edge_meg({l})"))
            .unwrap_or_else(|| "edge_meg".into());
        Ok(Self {
            n,
            spec: Arc::new(spec),
            init_samplers: Arc::new(samplers),
            states: vec![0; pairs],
            label,
        })
    }

    pub fn spec(&self) -> &EdgeChainSpec {
        &self.spec
    }

    #[cfg(test)]
    pub(crate) fn states_mut(&mut self) -> &mut [u16] {
        &mut self.states
    }

    fn write_snapshot(&self, out: &mut Snapshot) {
        out.clear();
        let mut idx = 0usize;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.spec.chi[self.states[idx] as usize] {
                    out.add_edge(i, j);
                }
                idx += 1;
            }
        }
    }
}

impl MegProcess for EdgeMeg {
    fn node_count(&self) -> usize {
        self.n
    }

    fn reset(&mut self, rng: &mut dyn RngCore) {
        let samplers = &*self.init_samplers;
        if samplers.len() == 1 {
            for s in &mut self.states {
                *s = samplers[0].sample(rng) as u16;
            }
        } else {
            for (s, sampler) in self.states.iter_mut().zip(samplers.iter()) {
                *s = sampler.sample(rng) as u16;
            }
        }
    }

    fn advance_into(&mut self, rng: &mut dyn RngCore, out: &mut Snapshot) {
        self.advance_silent(rng);
        self.write_snapshot(out);
    }

    fn advance_silent(&mut self, rng: &mut dyn RngCore) {
        let kernel = &self.spec.kernel;
        for s in &mut self.states {
            *s = kernel.sample_next(*s as usize, rng) as u16;
        }
    }

    fn pairs_exchangeable(&self) -> bool {
        true
    }

    fn edges_independent(&self) -> bool {
        true
    }

    fn model_id(&self) -> String {
        format!("{}-n{}", self.label, self.n)
    }

    fn clone_process(&self) -> Box<dyn MegProcess> {
        Box::new(Self {
            n: self.n,
            spec: Arc::clone(&self.spec),
            init_samplers: Arc::clone(&self.init_samplers),
            states: vec![0; self.states.len()],
            label: self.label.clone(),
        })
    }
}

/// The classic two-state edge model with birth rate `p` and death rate `q`.
pub fn build_two_state(n: usize, p: f64, q: f64) -> Result<EdgeMeg, EdgeMegError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EdgeMegError::RateOutOfRange {
            name: "p",
            value: p,
        });
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(EdgeMegError::RateOutOfRange {
            name: "q",
            value: q,
        });
    }
    let kernel = TransitionKernel::two_state(p, q)?;
    let spec = EdgeChainSpec::new(kernel, vec![false, true], None)?;
    EdgeMeg::new(n, spec)
}

/// Flooding-time bound for an edge-driven MEG: the generic epoch bound with
/// the pairwise-dependence parameter pinned to 1 by edge independence,
/// `c · T_mix · (1/(nα) + 1)² · (ln n)²`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EdgeMegBound {
    pub steps: f64,
    pub t_mix: usize,
    pub alpha: f64,
}

pub fn edge_meg_bound(
    n: usize,
    spec: &EdgeChainSpec,
    c: f64,
) -> Result<EdgeMegBound, EdgeMegError> {
    if spec.alpha() <= 0.0 {
        return Err(EdgeMegError::NoOnState);
    }
    let t_mix = spec.mixing()?.steps;
    let ln_n = (n as f64).ln();
    let density = 1.0 / (n as f64 * spec.alpha()) + 1.0;
    Ok(EdgeMegBound {
        steps: c * t_mix as f64 * density * density * ln_n * ln_n,
        t_mix,
        alpha: spec.alpha(),
    })
}

/// Prior-work comparison value for the two-state model: `ln n / ln(1 + np)`,
/// an almost-tight flooding-time shape used to judge tightness at `q ≥ np`.
pub fn two_state_comparator(n: usize, p: f64) -> Result<f64, EdgeMegError> {
    if p <= 0.0 {
        return Err(EdgeMegError::RateOutOfRange {
            name: "p",
            value: p,
        });
    }
    Ok((n as f64).ln() / (1.0 + n as f64 * p).ln())
}
