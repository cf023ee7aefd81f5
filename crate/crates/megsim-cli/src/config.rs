//! Experiment configuration: JSON schema,模型 specs that may scale with the
//! sweep variable `n`, and the stable config hash embedded in every output.

use serde::{Deserialize, Serialize};

use megsim::markov::KernelJson;
use megsim::rng::hash_str;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub label: String,
    pub model: ModelSpec,
    /// Node counts of the sweep; must be nonempty.
    pub sweep: Vec<usize>,
    /// Master seed; all trial streams derive from it. No wall-clock default.
    pub seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub sources: SourceSpec,
    /// Flooding step cap; defaults to 100× the relevant bound, else 10^6.
    #[serde(default)]
    pub step_cap: Option<usize>,
    #[serde(default)]
    pub epoch: EpochPolicy,
    #[serde(default)]
    pub estimators: EstimatorSettings,
    #[serde(default = "default_bound_c")]
    pub bound_c: f64,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_bound_c() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.sweep.is_empty() {
            anyhow::bail!("sweep must name at least one n");
        }
        if self.trials == 0 {
            anyhow::bail!("trials must be at least 1");
        }
        for &n in &self.sweep {
            if n < 2 {
                anyhow::bail!("every sweep point needs n ≥ 2, got {n}");
            }
        }
        if let SourceSpec::List(list) = &self.sources {
            if list.is_empty() {
                anyhow::bail!("source list must not be empty");
            }
            let min_n = *self.sweep.iter().min().expect("nonempty sweep");
            if let Some(&bad) = list.iter().find(|&&s| s >= min_n) {
                anyhow::bail!("source {bad} out of range for sweep point n = {min_n}");
            }
        }
        if let EpochPolicy::Explicit { explicit } = self.epoch {
            if explicit == 0 {
                anyhow::bail!("explicit epoch length must be at least 1");
            }
        }
        if let Some(sizes) = &self.estimators.beta_set_sizes {
            let min_n = *self.sweep.iter().min().expect("nonempty sweep");
            if let Some(&bad) = sizes.iter().find(|&&a| a == 0 || a > min_n - 2) {
                anyhow::bail!(
                    "beta set size {bad} out of range 1..={} for n = {min_n}",
                    min_n - 2
                );
            }
        }
        Ok(())
    }

    /// Stable 64-bit hash of the canonical JSON form (includes the seed).
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", hash_str(&text))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Edge-driven model: either the two-state (p, q) shortcut or an
    /// explicit kernel plus on/off projection.
    EdgeMeg {
        #[serde(default)]
        p: Option<RateSpec>,
        #[serde(default)]
        q: Option<RateSpec>,
        #[serde(default)]
        kernel: Option<KernelJson>,
        #[serde(default)]
        chi: Option<Vec<u8>>,
    },
    /// Node-driven model from an explicit kernel and connection map.
    NodeMeg {
        kernel: KernelJson,
        connection: ConnectionSpec,
        /// Initial node-state distribution mode; stationary by default.
        #[serde(default)]
        init: InitSpec,
    },
    RandomWalk {
        graph: GraphSpec,
        /// Optional stay-put probability to break periodicity.
        #[serde(default)]
        lazy: Option<f64>,
    },
    RandomPaths {
        graph: GraphSpec,
        paths: PathsSpec,
    },
    Waypoint {
        side: ScaleSpec,
        radius: f64,
        v_min: f64,
        v_max: f64,
        /// Grid resolution override; default follows the cell ≤ min(r, v)/2 rule.
        #[serde(default)]
        m: Option<usize>,
        /// Alternative resolution control: target cell size, giving
        /// `m = round(side/cell) + 1` at every sweep point. Ignored when `m`
        /// is set.
        #[serde(default)]
        cell: Option<f64>,
    },
}

/// A rate that may scale with the sweep variable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Const(f64),
    /// `value = over_n / n`.
    OverN {
        over_n: f64,
    },
}

impl RateSpec {
    pub fn value(&self, n: usize) -> f64 {
        match *self {
            RateSpec::Const(v) => v,
            RateSpec::OverN { over_n } => over_n / n as f64,
        }
    }
}

/// A length that may scale with the sweep variable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleSpec {
    Const(f64),
    /// `value = sqrt_n · √n`.
    SqrtN {
        sqrt_n: f64,
    },
}

impl ScaleSpec {
    pub fn value(&self, n: usize) -> f64 {
        match *self {
            ScaleSpec::Const(v) => v,
            ScaleSpec::SqrtN { sqrt_n } => sqrt_n * (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Generator {
        generator: String,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        k: Option<usize>,
    },
    Explicit {
        points: usize,
        edges: Vec<(u32, u32)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathsSpec {
    /// `"edges"`: single-edge paths in both directions (the walk family).
    Named(String),
    Explicit {
        paths: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConnectionSpec {
    Matrix {
        rows: Vec<Vec<u8>>,
    },
    SamePoint {
        point_of: Vec<u32>,
        points: usize,
    },
    /// Grid-euclidean connection: states project to points of an `m × m`
    /// grid with the given cell size; nodes connect within `radius`.
    WithinRadius {
        point_of: Vec<u32>,
        m: usize,
        cell: f64,
        radius: f64,
    },
}

/// Initial-distribution mode for node-driven models: `"stationary"`, an
/// explicit list of per-node weight vectors (one entry shared by all, or
/// n), or a burn-in step count.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    #[default]
    Stationary,
    Explicit(Vec<Vec<f64>>),
    BurnIn(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum SourceSpec {
    #[default]
    All,
    List(Vec<usize>),
}

impl SourceSpec {
    pub fn to_selection(&self) -> megsim::flooding::SourceSel {
        match self {
            SourceSpec::All => megsim::flooding::SourceSel::All,
            SourceSpec::List(v) => megsim::flooding::SourceSel::List(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum EpochPolicy {
    /// Epoch length from the model's analytics (mixing time and, for node
    /// models, the `ln(2n/P_NM²)` factor).
    #[default]
    Analytic,
    Explicit {
        explicit: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub enabled: bool,
    pub trials: usize,
    pub samples_per_trial: usize,
    pub burn_in_epochs: usize,
    /// Set sizes for the dependence-ratio sweep; default geometric.
    #[serde(default)]
    pub beta_set_sizes: Option<Vec<usize>>,
    /// Sweep-relative alternative: sizes `max(1, round(f·n))` per point.
    /// Ignored when `beta_set_sizes` is given.
    #[serde(default)]
    pub beta_set_fractions: Option<Vec<f64>>,
}

impl EstimatorSettings {
    pub fn beta_sizes(&self, n: usize) -> Option<Vec<usize>> {
        if let Some(sizes) = &self.beta_set_sizes {
            return Some(sizes.clone());
        }
        self.beta_set_fractions.as_ref().map(|fracs| {
            let mut sizes: Vec<usize> = fracs
                .iter()
                .map(|f| ((f * n as f64).round() as usize).clamp(1, n.saturating_sub(2)))
                .collect();
            sizes.sort_unstable();
            sizes.dedup();
            sizes
        })
    }
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            trials: 8,
            samples_per_trial: 512,
            burn_in_epochs: 3,
            beta_set_sizes: None,
            beta_set_fractions: None,
        }
    }
}
