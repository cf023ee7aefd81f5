//! Mixing time: the smallest `t` with `max_x TV(P^t(x, ·), π) ≤ eps`.
//!
//! For chains up to [`super::EXACT_STATE_CAP`] states the distance profile is
//! computed exactly by propagating all start rows one step at a time
//! (worst-case total variation to stationarity is non-increasing in `t`, so
//! the first crossing is the answer). Larger chains are estimated empirically
//! by advancing a population of walkers and measuring total variation on a
//! projected (bucketed) marginal; the method is recorded in the result.

use rand::RngCore;

use super::{total_variation, Distribution, MarkovError, TransitionKernel, EXACT_STATE_CAP};

/// Conventional total-variation threshold for "the chain has mixed".
pub const DEFAULT_MIXING_EPS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum MixingMethod {
    /// Exact worst-start total variation from dense propagation.
    Exact,
    /// Empirical crossing of projected total variation, with the sampling
    /// floor that was added to the threshold.
    ProjectedEmpirical {
        buckets: usize,
        walkers: usize,
        probes: usize,
        tv_floor: f64,
    },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MixingResult {
    pub steps: usize,
    pub eps: f64,
    /// Distance achieved at `steps`.
    pub achieved_tv: f64,
    pub method: MixingMethod,
}

/// Exact mixing time with the default iteration cap.
pub fn mixing_time(kernel: &TransitionKernel, eps: f64) -> Result<MixingResult, MarkovError> {
    mixing_time_capped(kernel, eps, 100_000)
}

/// Exact mixing time; errors with the best distance seen if `cap` steps do
/// not reach `eps` (reducible or periodic chains land here).
pub fn mixing_time_capped(
    kernel: &TransitionKernel,
    eps: f64,
    cap: usize,
) -> Result<MixingResult, MarkovError> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(MarkovError::InvalidInput(format!(
            "eps = {eps} outside (0, 1)"
        )));
    }
    let n = kernel.state_count();
    if n > EXACT_STATE_CAP {
        return Err(MarkovError::InvalidInput(format!(
            "{n} states exceeds the exact cap {EXACT_STATE_CAP}; use mixing_time_projected"
        )));
    }
    let pi = super::stationary_distribution(kernel, 1e-10)?;
    // rows[x] = distribution of X_t given X_0 = x; advance all rows in lockstep.
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            let mut r = vec![0.0; n];
            r[x] = 1.0;
            r
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut stall_anchor = (0usize, f64::INFINITY);
    for t in 1..=cap {
        for row in rows.iter_mut() {
            *row = kernel.propagate(row);
        }
        let d = rows
            .iter()
            .map(|r| total_variation(r, pi.weights()).expect("same domain"))
            .fold(0.0, f64::max);
        best = best.min(d);
        if d <= eps {
            return Ok(MixingResult {
                steps: t,
                eps,
                achieved_tv: d,
                method: MixingMethod::Exact,
            });
        }
        // Periodic chains plateau at a constant distance; once the profile
        // has not moved for a long stretch (growing patience window so slow
        // transients are not misjudged), report failure early.
        let (anchor_t, anchor_d) = stall_anchor;
        if anchor_d - best > 1e-13 * anchor_d.max(1.0) {
            stall_anchor = (t, best);
        } else if t - anchor_t >= (t / 4).max(256) {
            break;
        }
    }
    Err(MarkovError::MixingNotDetected {
        steps: cap,
        best_tv: best,
    })
}

/// Settings for the empirical projected estimator.
#[derive(Debug, Clone)]
pub struct ProjectedMixingConfig {
    /// Walkers advanced per probe start.
    pub walkers: usize,
    /// Step cap before reporting failure.
    pub cap: usize,
}

impl Default for ProjectedMixingConfig {
    fn default() -> Self {
        Self {
            walkers: 8192,
            cap: 100_000,
        }
    }
}

/// Empirical mixing estimate for chains too large for exact propagation.
///
/// `projection` maps each state to a bucket and `target` is the stationary
/// distribution over buckets. Walkers start at each probe state and advance
/// in lockstep; the estimate is the first step at which every probe's
/// empirical bucket marginal is within `eps` (plus the sampling floor) of
/// `target`. The floor is measured by resampling the target itself.
pub fn mixing_time_projected(
    kernel: &TransitionKernel,
    eps: f64,
    projection: &[u32],
    target: &[f64],
    probes: &[usize],
    cfg: &ProjectedMixingConfig,
    rng: &mut dyn RngCore,
) -> Result<MixingResult, MarkovError> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(MarkovError::InvalidInput(format!(
            "eps = {eps} outside (0, 1)"
        )));
    }
    if projection.len() != kernel.state_count() {
        return Err(MarkovError::DomainMismatch {
            left: projection.len(),
            right: kernel.state_count(),
        });
    }
    let buckets = target.len();
    if probes.is_empty() {
        return Err(MarkovError::InvalidInput("no probe starts".into()));
    }

    // Sampling floor: the TV a perfectly mixed population of this size shows.
    let target_dist = Distribution::new(target.to_vec())?;
    let sampler = super::CdfSampler::new(&target_dist);
    let mut floor = 0.0;
    let floor_reps = 4;
    for _ in 0..floor_reps {
        let mut counts = vec![0u64; buckets];
        for _ in 0..cfg.walkers {
            counts[sampler.sample(rng)] += 1;
        }
        floor += empirical_tv(&counts, target, cfg.walkers);
    }
    floor /= floor_reps as f64;

    let mut walkers: Vec<Vec<usize>> = probes.iter().map(|&p| vec![p; cfg.walkers]).collect();
    let threshold = eps + floor;
    let mut best = f64::INFINITY;
    for t in 1..=cfg.cap {
        let mut worst = 0.0f64;
        for states in walkers.iter_mut() {
            let mut counts = vec![0u64; buckets];
            for s in states.iter_mut() {
                *s = kernel.sample_next(*s, rng);
                counts[projection[*s] as usize] += 1;
            }
            worst = worst.max(empirical_tv(&counts, target, cfg.walkers));
        }
        best = best.min(worst);
        if worst <= threshold {
            return Ok(MixingResult {
                steps: t,
                eps,
                achieved_tv: worst,
                method: MixingMethod::ProjectedEmpirical {
                    buckets,
                    walkers: cfg.walkers,
                    probes: probes.len(),
                    tv_floor: floor,
                },
            });
        }
    }
    Err(MarkovError::MixingNotDetected {
        steps: cfg.cap,
        best_tv: best,
    })
}

fn empirical_tv(counts: &[u64], target: &[f64], total: usize) -> f64 {
    let inv = 1.0 / total as f64;
    0.5 * counts
        .iter()
        .zip(target)
        .map(|(&c, &p)| (c as f64 * inv - p).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rank_one_mixes_in_one_step() {
        let d = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let k = TransitionKernel::rank_one(&d).unwrap();
        let m = mixing_time(&k, 0.25).unwrap();
        assert_eq!(m.steps, 1);
        assert!(m.achieved_tv < 1e-12);
    }

    #[test]
    fn balanced_two_state_mixes_in_one_step() {
        let k = TransitionKernel::two_state(0.5, 0.5).unwrap();
        let m = mixing_time(&k, 0.25).unwrap();
        assert_eq!(m.steps, 1, "p = q = 1/2 reaches π exactly after one step");
    }

    #[test]
    fn two_state_mixing_scales_inversely_with_rate_sum() {
        // Two-state rate law: T_mix = Θ(1/(p+q)). Halving p+q should roughly
        // double the mixing time.
        let eps = 0.05;
        let times: Vec<usize> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&s| {
                let k = TransitionKernel::two_state(s * 0.4, s * 0.6).unwrap();
                mixing_time(&k, eps).unwrap().steps
            })
            .collect();
        for w in times.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            assert!(
                (1.5..=2.5).contains(&ratio),
                "mixing times {times:?} should double per halving of p+q, got ratio {ratio}"
            );
        }
    }

    #[test]
    fn two_state_mixing_matches_eigenvalue_oracle() {
        // Independent closed form: the two-state chain contracts toward π
        // at rate |1 − p − q| per step, so the worst-start distance after t
        // steps is |1−p−q|^t · max(π_on, π_off) and the mixing time is the
        // first t putting that at or below eps.
        for &(p, q, eps) in &[
            (0.2f64, 0.3f64, 0.25f64),
            (0.05, 0.02, 0.25),
            (0.05, 0.02, 0.01),
            (0.4, 0.35, 0.1),
            (0.01, 0.015, 0.05),
        ] {
            let k = TransitionKernel::two_state(p, q).unwrap();
            let lambda = (1.0 - p - q).abs();
            let worst0 = (p / (p + q)).max(q / (p + q));
            let oracle = (1..).find(|&t| worst0 * lambda.powi(t) <= eps).unwrap() as usize;
            let got = mixing_time(&k, eps).unwrap().steps;
            assert_eq!(
                got, oracle,
                "(p, q, eps) = ({p}, {q}, {eps}): propagation {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn periodic_stall_is_detected_early() {
        // A long even cycle is periodic; the stall detector must report the
        // failure without walking the whole iteration budget.
        let k = TransitionKernel::cycle(64).unwrap();
        let start = std::time::Instant::now();
        let err = mixing_time_capped(&k, 0.25, 1_000_000).unwrap_err();
        assert!(matches!(err, MarkovError::MixingNotDetected { .. }));
        assert!(
            start.elapsed() < std::time::Duration::from_secs(10),
            "stall detection should abort far below the cap"
        );
    }

    #[test]
    fn mixing_time_monotone_in_eps() {
        let k = TransitionKernel::two_state(0.1, 0.15).unwrap();
        let t1 = mixing_time(&k, 0.05).unwrap().steps;
        let t2 = mixing_time(&k, 0.25).unwrap().steps;
        assert!(t1 >= t2, "tighter eps cannot mix faster: {t1} < {t2}");
    }

    #[test]
    fn periodic_chain_reports_mixing_failure() {
        let k = TransitionKernel::cycle(2).unwrap();
        let err = mixing_time_capped(&k, 0.25, 500).unwrap_err();
        match err {
            MarkovError::MixingNotDetected { best_tv, .. } => {
                // A point mass on a 2-cycle keeps TV exactly 1/2 from π.
                assert!(
                    (best_tv - 0.5).abs() < 1e-12,
                    "period-2 chain stays at TV 1/2, got {best_tv}"
                );
            }
            other => panic!("expected MixingNotDetected, got {other:?}"),
        }
    }

    #[test]
    fn projected_estimate_tracks_exact_on_a_small_chain() {
        let k = TransitionKernel::two_state(0.05, 0.08).unwrap();
        let exact = mixing_time(&k, 0.25).unwrap().steps;
        let pi = super::super::stationary_distribution(&k, 1e-12).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let est = mixing_time_projected(
            &k,
            0.25,
            &[0, 1],
            pi.weights(),
            &[0, 1],
            &ProjectedMixingConfig {
                walkers: 20_000,
                cap: 10_000,
            },
            &mut rng,
        )
        .unwrap();
        let lo = exact as f64 * 0.5;
        let hi = exact as f64 * 2.0;
        assert!(
            (lo..=hi).contains(&(est.steps as f64)),
            "projected estimate {} far from exact {exact}",
            est.steps
        );
    }
}
