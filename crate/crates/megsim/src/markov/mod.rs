//! Finite Markov chain machinery: row-stochastic kernels, stationary
//! distributions, total variation distance, mixing times, and trajectory
//! sampling.
//!
//! Kernels are immutable after construction and safe to share across
//! workers. Every sampling call takes its own random stream.

mod kernel;
mod mixing;
pub mod oracles;

pub use kernel::{BuiltinKernel, KernelJson, KernelModel, TransitionKernel};
pub use mixing::{
    mixing_time, mixing_time_capped, mixing_time_projected, MixingMethod, MixingResult,
    ProjectedMixingConfig, DEFAULT_MIXING_EPS,
};

use rand::RngCore;
use thiserror::Error;

/// Row sums and distribution weights must match 1 within this tolerance.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Largest state count for which exact (dense linear algebra) routes are used.
pub const EXACT_STATE_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("domain size mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("chain appears non-ergodic: {0}")]
    NonErgodic(String),
    #[error(
        "stationary solve did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NoConvergence { residual: f64, iterations: usize },
    #[error("mixing not detected within {steps} steps (best total variation {best_tv:.6})")]
    MixingNotDetected { steps: usize, best_tv: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A probability distribution over a finite domain `0..len`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates non-negativity and normalization (within [`PROB_SUM_TOL`]).
    pub fn new(weights: Vec<f64>) -> Result<Self, MarkovError> {
        if weights.is_empty() {
            return Err(MarkovError::InvalidDistribution("empty domain".into()));
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(MarkovError::InvalidDistribution(format!(
                    "weight {w} at index {i} is negative or non-finite"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL * weights.len() as f64 {
            return Err(MarkovError::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Point mass at `at`.
    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len, "point mass outside domain");
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0);
        Self {
            weights: vec![1.0 / len as f64; len],
        }
    }

    /// Normalizes non-negative counts into a distribution.
    pub fn from_counts(counts: &[u64]) -> Result<Self, MarkovError> {
        let total: u64 = counts.iter().sum();
        if counts.is_empty() || total == 0 {
            return Err(MarkovError::InvalidDistribution("no mass in counts".into()));
        }
        Ok(Self {
            weights: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// One draw by inverse-CDF scan. Fine for the small domains sampled in
    /// hot loops; use [`CdfSampler`] for repeated draws from large domains.
    pub fn sample(&self, rng: &mut dyn RngCore) -> usize {
        sample_index(&self.weights, rng)
    }

    /// Total variation distance `(1/2) Σ |p(x) − q(x)|`.
    pub fn total_variation(&self, other: &Distribution) -> Result<f64, MarkovError> {
        total_variation(self.weights(), other.weights())
    }
}

/// Total variation distance between two weight vectors over the same domain.
pub fn total_variation(a: &[f64], b: &[f64]) -> Result<f64, MarkovError> {
    if a.len() != b.len() {
        return Err(MarkovError::DomainMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(0.5 * sum)
}

/// Inverse-CDF draw from unnormalized non-negative weights.
pub(crate) fn sample_index(weights: &[f64], rng: &mut dyn RngCore) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rand::Rng::random::<f64>(&mut *rng) * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Precomputed cumulative table for repeated draws from one distribution.
pub struct CdfSampler {
    cdf: Vec<f64>,
}

impl CdfSampler {
    pub fn new(dist: &Distribution) -> Self {
        let mut cdf = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for &w in dist.weights() {
            acc += w;
            cdf.push(acc);
        }
        // Guard against rounding keeping the last entry below 1.
        if let Some(last) = cdf.last_mut() {
            *last = f64::max(*last, 1.0);
        }
        Self { cdf }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> usize {
        let u = rand::Rng::random::<f64>(&mut *rng);
        match self
            .cdf
            .binary_search_by(|probe| probe.partial_cmp(&u).unwrap())
        {
            Ok(i) => (i + 1).min(self.cdf.len() - 1),
            Err(i) => i.min(self.cdf.len() - 1),
        }
    }
}

/// Stationary distribution of an ergodic kernel.
///
/// Exact linear solve (LU with partial pivoting on the balance equations)
/// when the chain has at most [`EXACT_STATE_CAP`] states; power iteration
/// with residual stopping otherwise. The result `π` always satisfies
/// `‖πP − π‖∞ ≤ tol`; failure to reach that residual is reported as an
/// error, never as a silently wrong answer.
pub fn stationary_distribution(
    kernel: &TransitionKernel,
    tol: f64,
) -> Result<Distribution, MarkovError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(MarkovError::InvalidInput("tol must be > 0".into()));
    }
    let n = kernel.state_count();
    if n == 1 {
        return Distribution::new(vec![1.0]);
    }
    let pi = if n <= EXACT_STATE_CAP {
        solve_stationary_dense(kernel)?
    } else {
        power_iterate(kernel, tol, 200_000)?
    };
    // Gate on both the max-norm residual and the (stronger at large n)
    // total-variation residual TV(πP, π).
    let (max_norm, tv) = stationary_residuals(kernel, &pi);
    let residual = max_norm.max(tv);
    if residual > tol {
        return Err(MarkovError::NoConvergence {
            residual,
            iterations: 0,
        });
    }
    Distribution::new(pi)
}

/// Max-norm residual `‖πP − π‖∞`.
pub fn stationary_residual(kernel: &TransitionKernel, pi: &[f64]) -> f64 {
    stationary_residuals(kernel, pi).0
}

/// `(‖πP − π‖∞, TV(πP, π))`.
pub fn stationary_residuals(kernel: &TransitionKernel, pi: &[f64]) -> (f64, f64) {
    let next = kernel.propagate(pi);
    let mut max_norm = 0.0f64;
    let mut l1 = 0.0f64;
    for (a, b) in pi.iter().zip(&next) {
        let d = (a - b).abs();
        max_norm = max_norm.max(d);
        l1 += d;
    }
    (max_norm, 0.5 * l1)
}

/// Solves `π (P − I) = 0, Σπ = 1` by LU factorization of the transposed
/// system with the last balance equation replaced by normalization.
fn solve_stationary_dense(kernel: &TransitionKernel) -> Result<Vec<f64>, MarkovError> {
    let n = kernel.state_count();
    // a[r][c] in row-major: rows are equations.
    let mut a = vec![0.0f64; n * n];
    for x in 0..n {
        kernel.for_each_successor(x, &mut |y, p| {
            // Equation y: Σ_x π(x) P(x,y) − π(y) = 0 → coefficient of π(x) is P(x,y).
            a[y * n + x] += p;
        });
    }
    for y in 0..n {
        a[y * n + y] -= 1.0;
    }
    // Replace the last equation with Σ π = 1.
    for x in 0..n {
        a[(n - 1) * n + x] = 1.0;
    }
    let mut b = vec![0.0f64; n];
    b[n - 1] = 1.0;

    // LU with partial pivoting, in place.
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (pivot_row, pivot_val) =
            (col..n)
                .map(|r| (r, a[perm[r] * n + col].abs()))
                .fold(
                    (col, 0.0),
                    |acc, item| if item.1 > acc.1 { item } else { acc },
                );
        if pivot_val < 1e-13 {
            return Err(MarkovError::NonErgodic(
                "singular balance system; the chain is likely reducible".into(),
            ));
        }
        perm.swap(col, pivot_row);
        let prow = perm[col];
        let pivot = a[prow * n + col];
        for &row in perm.iter().skip(col + 1) {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for c in (col + 1)..n {
                a[row * n + c] -= factor * a[prow * n + c];
            }
            b[row] -= factor * b[prow];
        }
    }
    // Back substitution.
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let row = perm[col];
        let mut acc = b[row];
        for c in (col + 1)..n {
            acc -= a[row * n + c] * x[c];
        }
        x[col] = acc / a[row * n + col];
    }
    // Clamp solver noise and renormalize.
    let mut sum = 0.0;
    for v in &mut x {
        if *v < 0.0 {
            if *v < -1e-9 {
                return Err(MarkovError::NonErgodic(format!(
                    "stationary solve produced weight {v}; chain is likely reducible"
                )));
            }
            *v = 0.0;
        }
        sum += *v;
    }
    if sum <= 0.0 {
        return Err(MarkovError::NonErgodic("zero-mass stationary solve".into()));
    }
    for v in &mut x {
        *v /= sum;
    }
    Ok(x)
}

fn power_iterate(
    kernel: &TransitionKernel,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>, MarkovError> {
    let n = kernel.state_count();
    let mut cur = vec![1.0 / n as f64; n];
    let mut best = f64::INFINITY;
    for it in 0..max_iters {
        let next = kernel.propagate(&cur);
        let residual = cur
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        cur = next;
        best = best.min(residual);
        if residual <= tol {
            return Ok(cur);
        }
        // Cheap early abort for plainly periodic chains: residual stuck high.
        if it > 10_000 && residual > 0.5 * best && best > 100.0 * tol {
            break;
        }
    }
    Err(MarkovError::NoConvergence {
        residual: best,
        iterations: max_iters,
    })
}

/// Samples a trajectory of `steps + 1` states: element 0 from `init`, each
/// following element from the row of its predecessor.
pub fn sample_trajectory(
    kernel: &TransitionKernel,
    init: &Distribution,
    steps: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<usize>, MarkovError> {
    if init.len() != kernel.state_count() {
        return Err(MarkovError::DomainMismatch {
            left: init.len(),
            right: kernel.state_count(),
        });
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = init.sample(rng);
    out.push(state);
    for _ in 0..steps {
        state = kernel.sample_next(state, rng);
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn two_state(p: f64, q: f64) -> TransitionKernel {
        TransitionKernel::two_state(p, q).unwrap()
    }

    #[test]
    fn two_state_stationary_matches_birth_death_ratio() {
        let k = two_state(0.2, 0.3);
        let pi = stationary_distribution(&k, 1e-12).unwrap();
        assert!(
            (pi.get(1) - 0.4).abs() < 1e-12,
            "π(on) should be p/(p+q) = 0.4, got {}",
            pi.get(1)
        );
    }

    #[test]
    fn rank_one_chain_is_stationary_at_its_row() {
        let d = Distribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let k = TransitionKernel::rank_one(&d).unwrap();
        let pi = stationary_distribution(&k, 1e-12).unwrap();
        for i in 0..3 {
            assert!((pi.get(i) - d.get(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_walk_is_uniform() {
        let rows = vec![
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ];
        let k = TransitionKernel::from_rows(rows).unwrap();
        let pi = stationary_distribution(&k, 1e-12).unwrap();
        for i in 0..3 {
            assert!((pi.get(i) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_residuals_meet_tolerance_on_a_midsize_chain() {
        // Random-ish sparse 600-state chain: both residual metrics of the
        // exact solve stay within the requested tolerance.
        let n = 600;
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                let a = (i * 7 + 1) % n;
                let b = (i * 131 + 17) % n;
                if a == b {
                    vec![(a, 1.0)]
                } else {
                    vec![(a.min(b), 0.55), (a.max(b), 0.45)]
                }
            })
            .map(|mut row| {
                row.push((0, 0.0)); // keep rows irregular but valid
                row.retain(|&(_, p)| p > 0.0);
                row
            })
            .collect();
        // Blend with a uniform restart to guarantee ergodicity.
        let uniform = 0.05 / n as f64;
        let rows: Vec<Vec<(usize, f64)>> = rows
            .into_iter()
            .map(|row| {
                let mut dense = vec![uniform; n];
                for (s, p) in row {
                    dense[s] += 0.95 * p;
                }
                dense.into_iter().enumerate().collect()
            })
            .collect();
        let k = TransitionKernel::from_sparse_rows(rows).unwrap();
        let pi = stationary_distribution(&k, 1e-12).unwrap();
        let (max_norm, tv) = stationary_residuals(&k, pi.weights());
        assert!(max_norm <= 1e-12, "max-norm residual {max_norm}");
        assert!(tv <= 1e-12, "total-variation residual {tv}");
    }

    #[test]
    fn reducible_chain_is_reported_not_answered() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let k = TransitionKernel::from_rows(rows).unwrap();
        let err = stationary_distribution(&k, 1e-12).unwrap_err();
        assert!(matches!(err, MarkovError::NonErgodic(_)), "got {err:?}");
    }

    #[test]
    fn total_variation_basics() {
        let d1 = Distribution::new(vec![1.0, 0.0]).unwrap();
        let d2 = Distribution::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(d1.total_variation(&d1).unwrap(), 0.0);
        assert_eq!(d1.total_variation(&d2).unwrap(), 1.0);
        let d3 = Distribution::new(vec![0.6, 0.4]).unwrap();
        let d4 = Distribution::new(vec![0.5, 0.5]).unwrap();
        assert!((d3.total_variation(&d4).unwrap() - 0.1).abs() < 1e-15);
        let d5 = Distribution::new(vec![1.0]).unwrap();
        assert!(d1.total_variation(&d5).is_err(), "mismatched domains");
    }

    #[test]
    fn trajectory_on_deterministic_cycle() {
        let k = TransitionKernel::cycle(3).unwrap();
        let init = Distribution::point_mass(3, 0);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let traj = sample_trajectory(&k, &init, 3, &mut rng).unwrap();
        assert_eq!(traj, vec![0, 1, 2, 0]);
    }

    #[test]
    fn trajectory_zero_steps_draws_once_from_init() {
        let k = two_state(0.5, 0.5);
        let init = Distribution::point_mass(2, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let traj = sample_trajectory(&k, &init, 0, &mut rng).unwrap();
        assert_eq!(traj, vec![1]);
    }

    #[test]
    fn long_run_occupancy_matches_stationary() {
        let k = two_state(0.5, 0.5);
        let init = Distribution::point_mass(2, 0);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let steps = 100_000;
        let traj = sample_trajectory(&k, &init, steps, &mut rng).unwrap();
        let ones = traj.iter().filter(|&&s| s == 1).count() as f64;
        let freq = ones / (steps as f64 + 1.0);
        let sigma = 0.5 / (steps as f64).sqrt();
        assert!(
            (freq - 0.5).abs() < 3.0 * sigma,
            "occupancy {freq} departs from 0.5 by more than 3σ = {}",
            3.0 * sigma
        );
    }

    #[test]
    fn cdf_sampler_agrees_with_weights() {
        let d = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let sampler = CdfSampler::new(&d);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut counts = [0u64; 3];
        for _ in 0..60_000 {
            counts[sampler.sample(&mut rng)] += 1;
        }
        for (i, &count) in counts.iter().enumerate() {
            let freq = count as f64 / 60_000.0;
            assert!(
                (freq - d.get(i)).abs() < 0.01,
                "state {i}: {freq} vs {}",
                d.get(i)
            );
        }
    }
}
