//! Row-stochastic transition kernels.
//!
//! Small chains are stored densely, structured chains (mobility paths) as
//! sparse rows, and very large procedurally-defined chains (waypoint trips)
//! behind the [`KernelModel`] trait. All representations expose the same
//! row-iteration and sampling surface.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{sample_index, MarkovError, PROB_SUM_TOL};

/// A procedurally defined chain: rows are produced on demand.
///
/// Implementations must be row-stochastic; construction spot-checks a sample
/// of rows. `sample_next` defaults to inverse-CDF over `successors` but can
/// be overridden when the row has exploitable structure.
pub trait KernelModel: Send + Sync {
    fn state_count(&self) -> usize;

    /// Visits `(next_state, probability)` for every nonzero entry of a row.
    fn successors(&self, state: usize, visit: &mut dyn FnMut(usize, f64));

    fn sample_next(&self, state: usize, rng: &mut dyn RngCore) -> usize {
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(4);
        self.successors(state, &mut |s, p| entries.push((s, p)));
        let weights: Vec<f64> = entries.iter().map(|&(_, p)| p).collect();
        entries[sample_index(&weights, rng)].0
    }

    fn label(&self) -> &str {
        "model"
    }
}

enum Repr {
    /// Row-major `n × n`.
    Dense(Vec<f64>),
    /// CSR: `offsets.len() == n + 1`, entries are `(col, prob)`.
    Sparse {
        offsets: Vec<usize>,
        entries: Vec<(u32, f64)>,
    },
    Model(Arc<dyn KernelModel>),
}

/// A finite Markov chain `(S, P)` with validated row-stochastic transitions.
pub struct TransitionKernel {
    states: usize,
    repr: Repr,
    label: Option<String>,
}

impl std::fmt::Debug for TransitionKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionKernel")
            .field("states", &self.states)
            .field("label", &self.label)
            .field(
                "repr",
                &match &self.repr {
                    Repr::Dense(_) => "dense",
                    Repr::Sparse { .. } => "sparse",
                    Repr::Model(_) => "model",
                },
            )
            .finish()
    }
}

fn check_row(row_idx: usize, sum: f64, states: usize) -> Result<(), MarkovError> {
    if (sum - 1.0).abs() > PROB_SUM_TOL * states.max(8) as f64 {
        return Err(MarkovError::InvalidKernel(format!(
            "row {row_idx} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn check_entry(row_idx: usize, p: f64) -> Result<(), MarkovError> {
    if !p.is_finite() || !(0.0..=1.0 + PROB_SUM_TOL).contains(&p) {
        return Err(MarkovError::InvalidKernel(format!(
            "row {row_idx} has entry {p} outside [0, 1]"
        )));
    }
    Ok(())
}

impl TransitionKernel {
    /// Dense kernel from explicit rows; every row must be a distribution.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        let n = rows.len();
        if n == 0 {
            return Err(MarkovError::InvalidKernel("no states".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MarkovError::InvalidKernel(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for &p in row {
                check_entry(i, p)?;
                sum += p;
            }
            check_row(i, sum, n)?;
            flat.extend_from_slice(row);
        }
        Ok(Self {
            states: n,
            repr: Repr::Dense(flat),
            label: None,
        })
    }

    /// Sparse kernel from per-row `(state, probability)` lists.
    pub fn from_sparse_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self, MarkovError> {
        let n = rows.len();
        if n == 0 {
            return Err(MarkovError::InvalidKernel("no states".into()));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(s, p) in row {
                if s >= n {
                    return Err(MarkovError::InvalidKernel(format!(
                        "row {i} references state {s} out of {n}"
                    )));
                }
                check_entry(i, p)?;
                sum += p;
                entries.push((s as u32, p));
            }
            check_row(i, sum, n)?;
            offsets.push(entries.len());
        }
        Ok(Self {
            states: n,
            repr: Repr::Sparse { offsets, entries },
            label: None,
        })
    }

    /// Wraps a procedural chain, spot-checking row stochasticity on a sample
    /// of rows (all rows when the chain is small).
    pub fn from_model(model: Arc<dyn KernelModel>) -> Result<Self, MarkovError> {
        let n = model.state_count();
        if n == 0 {
            return Err(MarkovError::InvalidKernel("no states".into()));
        }
        let stride = (n / 1024).max(1);
        for state in (0..n).step_by(stride) {
            let mut sum = 0.0;
            let mut bad = None;
            model.successors(state, &mut |s, p| {
                if s >= n || !(0.0..=1.0 + PROB_SUM_TOL).contains(&p) {
                    bad = Some((s, p));
                }
                sum += p;
            });
            if let Some((s, p)) = bad {
                return Err(MarkovError::InvalidKernel(format!(
                    "model row {state} has entry ({s}, {p}) out of range"
                )));
            }
            check_row(state, sum, n)?;
        }
        let label = Some(model.label().to_string());
        Ok(Self {
            states: n,
            repr: Repr::Model(model),
            label,
        })
    }

    /// Two-state on/off chain: `off → on` with probability `p` (birth),
    /// `on → off` with probability `q` (death). State 1 is "on".
    pub fn two_state(p: f64, q: f64) -> Result<Self, MarkovError> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(MarkovError::InvalidKernel(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        let mut k = Self::from_rows(vec![vec![1.0 - p, p], vec![q, 1.0 - q]])?;
        k.label = Some(format!("two_state(p={p},q={q})"));
        Ok(k)
    }

    /// Rank-one chain: every row equals `d`, so the chain mixes in one step.
    pub fn rank_one(d: &super::Distribution) -> Result<Self, MarkovError> {
        let row = d.weights().to_vec();
        let mut k = Self::from_rows(vec![row; d.len()])?;
        k.label = Some("rank_one".into());
        Ok(k)
    }

    /// Deterministic cycle on `n` states.
    pub fn cycle(n: usize) -> Result<Self, MarkovError> {
        if n == 0 {
            return Err(MarkovError::InvalidKernel("no states".into()));
        }
        let rows = (0..n).map(|i| vec![((i + 1) % n, 1.0)]).collect();
        let mut k = Self::from_sparse_rows(rows)?;
        k.label = Some(format!("cycle({n})"));
        Ok(k)
    }

    /// Lazy version: stay put with probability `stay`, otherwise step with
    /// the original kernel. Breaks periodicity when `stay ∈ (0, 1)`.
    pub fn lazify(&self, stay: f64) -> Result<Self, MarkovError> {
        if !(0.0..1.0).contains(&stay) {
            return Err(MarkovError::InvalidInput(format!(
                "stay probability {stay} outside [0, 1)"
            )));
        }
        let n = self.states;
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for x in 0..n {
            let mut row = Vec::new();
            self.for_each_successor(x, &mut |y, p| row.push((y, p * (1.0 - stay))));
            row.push((x, stay));
            row.sort_unstable_by_key(|&(y, _)| y);
            // merge duplicates (self-loop already present in the base chain)
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (y, p) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == y => last.1 += p,
                    _ => merged.push((y, p)),
                }
            }
            rows.push(merged);
        }
        let mut k = Self::from_sparse_rows(rows)?;
        k.label = self.label.as_ref().map(|l| format!("lazy({stay})+{l}"));
        Ok(k)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// True when rows can only be produced procedurally.
    pub fn is_model_backed(&self) -> bool {
        matches!(self.repr, Repr::Model(_))
    }

    /// Visits `(next_state, probability)` over the nonzero entries of a row.
    pub fn for_each_successor(&self, state: usize, visit: &mut dyn FnMut(usize, f64)) {
        match &self.repr {
            Repr::Dense(flat) => {
                let row = &flat[state * self.states..(state + 1) * self.states];
                for (y, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        visit(y, p);
                    }
                }
            }
            Repr::Sparse { offsets, entries } => {
                for &(y, p) in &entries[offsets[state]..offsets[state + 1]] {
                    visit(y as usize, p);
                }
            }
            Repr::Model(m) => m.successors(state, visit),
        }
    }

    /// One transition from `state`.
    pub fn sample_next(&self, state: usize, rng: &mut dyn RngCore) -> usize {
        match &self.repr {
            Repr::Dense(flat) => {
                let row = &flat[state * self.states..(state + 1) * self.states];
                sample_index(row, rng)
            }
            Repr::Sparse { offsets, entries } => {
                let row = &entries[offsets[state]..offsets[state + 1]];
                let mut u = rand::Rng::random::<f64>(&mut *rng);
                for &(y, p) in row {
                    u -= p;
                    if u < 0.0 {
                        return y as usize;
                    }
                }
                row.last().map(|&(y, _)| y as usize).unwrap_or(state)
            }
            Repr::Model(m) => m.sample_next(state, rng),
        }
    }

    /// One step of the distribution map: returns `d · P`.
    pub fn propagate(&self, d: &[f64]) -> Vec<f64> {
        assert_eq!(d.len(), self.states, "distribution/kernel size mismatch");
        let mut out = vec![0.0f64; self.states];
        match &self.repr {
            Repr::Dense(flat) => {
                for (x, &w) in d.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let row = &flat[x * self.states..(x + 1) * self.states];
                    for (y, &p) in row.iter().enumerate() {
                        out[y] += w * p;
                    }
                }
            }
            Repr::Sparse { offsets, entries } => {
                for (x, &w) in d.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for &(y, p) in &entries[offsets[x]..offsets[x + 1]] {
                        out[y as usize] += w * p;
                    }
                }
            }
            Repr::Model(m) => {
                for (x, &w) in d.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    m.successors(x, &mut |y, p| out[y] += w * p);
                }
            }
        }
        out
    }

    /// Dense row-major copy; `None` for model-backed chains above the cap.
    pub fn to_dense(&self, cap: usize) -> Option<Vec<f64>> {
        if self.states > cap {
            return None;
        }
        let mut flat = vec![0.0f64; self.states * self.states];
        for x in 0..self.states {
            self.for_each_successor(x, &mut |y, p| flat[x * self.states + y] += p);
        }
        Some(flat)
    }

    /// JSON document `{"states": N, "rows": [[...], ...]}`. Only concrete
    /// (dense/sparse) kernels are serializable.
    pub fn to_json(&self) -> Result<String, MarkovError> {
        let dense = self.to_dense(super::EXACT_STATE_CAP).ok_or_else(|| {
            MarkovError::InvalidInput("model-backed kernel has no JSON form".into())
        })?;
        let rows: Vec<Vec<f64>> = (0..self.states)
            .map(|x| dense[x * self.states..(x + 1) * self.states].to_vec())
            .collect();
        let doc = KernelJson::Dense {
            states: self.states,
            rows,
        };
        serde_json::to_string(&doc)
            .map_err(|e| MarkovError::InvalidInput(format!("serialize: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self, MarkovError> {
        let doc: KernelJson = serde_json::from_str(text)
            .map_err(|e| MarkovError::InvalidKernel(format!("parse: {e}")))?;
        TransitionKernel::try_from(doc)
    }
}

/// JSON schema for kernels: explicit dense rows or a named built-in.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelJson {
    Builtin(BuiltinKernel),
    Dense { states: usize, rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum BuiltinKernel {
    TwoState { p: f64, q: f64 },
    Cycle { states: usize },
    RankOne { weights: Vec<f64> },
}

impl TryFrom<KernelJson> for TransitionKernel {
    type Error = MarkovError;

    fn try_from(doc: KernelJson) -> Result<Self, MarkovError> {
        match doc {
            KernelJson::Dense { states, rows } => {
                if rows.len() != states {
                    return Err(MarkovError::InvalidKernel(format!(
                        "declared {states} states but {} rows",
                        rows.len()
                    )));
                }
                TransitionKernel::from_rows(rows)
            }
            KernelJson::Builtin(BuiltinKernel::TwoState { p, q }) => {
                TransitionKernel::two_state(p, q)
            }
            KernelJson::Builtin(BuiltinKernel::Cycle { states }) => TransitionKernel::cycle(states),
            KernelJson::Builtin(BuiltinKernel::RankOne { weights }) => {
                let d = super::Distribution::new(weights)?;
                TransitionKernel::rank_one(&d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rejects_non_stochastic_rows() {
        let err = TransitionKernel::from_rows(vec![vec![0.5, 0.4], vec![0.5, 0.5]]);
        assert!(err.is_err(), "row summing to 0.9 must be rejected");
        let err = TransitionKernel::from_rows(vec![vec![1.5, -0.5], vec![0.5, 0.5]]);
        assert!(err.is_err(), "negative entries must be rejected");
    }

    #[test]
    fn sparse_and_dense_propagate_agree() {
        let dense = TransitionKernel::from_rows(vec![
            vec![0.1, 0.9, 0.0],
            vec![0.3, 0.0, 0.7],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let sparse = TransitionKernel::from_sparse_rows(vec![
            vec![(0, 0.1), (1, 0.9)],
            vec![(0, 0.3), (2, 0.7)],
            vec![(1, 0.5), (2, 0.5)],
        ])
        .unwrap();
        let d = vec![0.2, 0.3, 0.5];
        let a = dense.propagate(&d);
        let b = sparse.propagate(&d);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip_preserves_rows() {
        let k = TransitionKernel::two_state(0.2, 0.3).unwrap();
        let text = k.to_json().unwrap();
        let back = TransitionKernel::from_json(&text).unwrap();
        assert_eq!(back.state_count(), 2);
        assert_eq!(back.to_dense(16), k.to_dense(16));
    }

    #[test]
    fn builtin_json_forms_parse() {
        let k = TransitionKernel::from_json(r#"{"builtin":"two_state","p":0.2,"q":0.3}"#).unwrap();
        assert_eq!(k.state_count(), 2);
        let k = TransitionKernel::from_json(r#"{"builtin":"cycle","states":5}"#).unwrap();
        assert_eq!(k.state_count(), 5);
    }

    #[test]
    fn lazify_preserves_stochasticity_and_adds_self_loop() {
        let k = TransitionKernel::cycle(4).unwrap().lazify(0.5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut stayed = 0;
        for _ in 0..1000 {
            if k.sample_next(0, &mut rng) == 0 {
                stayed += 1;
            }
        }
        assert!(
            (400..600).contains(&stayed),
            "lazy chain should stay put about half the time, stayed {stayed}"
        );
    }
}
