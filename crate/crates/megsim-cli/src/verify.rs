//! The `verify` subcommand: runs the probability-inequality oracles, the
//! product total-variation property, the expansion-event frequency checks,
//! and the pairwise-dependence guarantee on built-in models, and reports
//! one pass/fail line per suite.

use anyhow::Result;
use serde::Serialize;

use megsim::dynamic::{verify_expansion_events, EventVerdict, ExpansionConfig};
use megsim::edge_meg::build_two_state;
use megsim::markov::oracles::random_oracle_suite;
use megsim::markov::{total_variation, Distribution, TransitionKernel};
use megsim::mobility::{build_random_walk, MobilityGraph};
use megsim::node_meg::{AnalyticsConfig, ConnMatrix, ConnectionMap, InitMode, NodeMeg};
use megsim::rng::trial_rng;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: usize,
    pub failures: usize,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteResult>,
    pub all_pass: bool,
}

/// Exhaustively checks `TV(ψ, ζ) ≤ Σ_i TV(ψ_i, ζ_i)` on random product
/// pairs with `k ≤ 4` factors over domains of size at most 5.
pub fn product_tv_suite(samples: usize, seed: u64) -> SuiteResult {
    let mut rng = trial_rng(seed, "product-tv", 0, 0);
    let mut failures = 0usize;
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..samples {
        let k = rand::Rng::random_range(&mut rng, 1..=4usize);
        let mut lhs_factors = Vec::with_capacity(k);
        let mut rhs_sum = 0.0;
        let mut product_tv_domain: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(k);
        for _ in 0..k {
            let len = rand::Rng::random_range(&mut rng, 1..=5usize);
            let draw = |rng: &mut rand_chacha::ChaCha12Rng| {
                let mut w: Vec<f64> = (0..len)
                    .map(|_| rand::Rng::random_range(&mut *rng, 0.01..1.0))
                    .collect();
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= total);
                w
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            rhs_sum += total_variation(&a, &b).expect("same domain");
            lhs_factors.push(len);
            product_tv_domain.push((a, b));
        }
        // Explicit enumeration of the product domain.
        let mut lhs = 0.0f64;
        let total: usize = lhs_factors.iter().product();
        for flat in 0..total {
            let mut idx = flat;
            let mut pa = 1.0f64;
            let mut pb = 1.0f64;
            for (len, (a, b)) in lhs_factors.iter().zip(&product_tv_domain) {
                let pos = idx % len;
                idx /= len;
                pa *= a[pos];
                pb *= b[pos];
            }
            lhs += (pa - pb).abs();
        }
        lhs *= 0.5;
        let gap = lhs - rhs_sum;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-12 {
            failures += 1;
        }
    }
    SuiteResult {
        suite: "product-total-variation".into(),
        checks: samples,
        failures,
        pass: failures == 0,
        detail: format!("worst lhs − rhs = {worst_gap:.3e}"),
    }
}

/// Built-in two-point meeting model: rank-one chain with weights
/// (0.9, 0.1) and connection only when both nodes sit at state 0.
pub fn point_meeting_model(n: usize) -> Result<NodeMeg> {
    let d = Distribution::new(vec![0.9, 0.1])?;
    let kernel = TransitionKernel::rank_one(&d)?;
    let conn = ConnectionMap::Matrix(ConnMatrix::from_rows(&[vec![1, 0], vec![0, 0]])?);
    Ok(NodeMeg::with_label(
        n,
        kernel,
        conn,
        InitMode::Stationary,
        &AnalyticsConfig::default(),
        "point-meeting",
    )?)
}

/// Runs every verification suite at the given sampling budget.
pub fn run_verify(samples: usize, seed: u64) -> Result<VerifyReport> {
    let mut suites = Vec::new();

    // Probability-inequality oracles on exhaustively evaluable instances.
    let mut rng = trial_rng(seed, "oracles", 0, 0);
    let report = random_oracle_suite(samples, &mut rng);
    suites.push(SuiteResult {
        suite: "inequality-oracles".into(),
        checks: report.checks.len(),
        failures: report.failures().count(),
        pass: report.all_hold,
        detail: report
            .failures()
            .next()
            .map(|c| format!("first failure: {}", c.name))
            .unwrap_or_else(|| "all inequalities hold".into()),
    });

    suites.push(product_tv_suite(samples, seed));

    // Expansion-event frequencies on the two-state edge model.
    let meg = build_two_state(32, 0.2, 0.3)?;
    let epoch = meg.spec().mixing()?.steps;
    let cfg = ExpansionConfig {
        set_sizes: vec![2, 4, 8],
        epoch_samples: 4000,
        spread_samples: 120,
        spread_epochs: 64,
        contact_samples: 240,
        contact_epochs: 16,
        burn_in_epochs: 3,
    };
    let report = verify_expansion_events(&meg, meg.spec().alpha(), 1.0, epoch, &cfg, seed);
    let failures = report
        .checks
        .iter()
        .filter(|c| c.verdict == EventVerdict::Fail)
        .count();
    suites.push(SuiteResult {
        suite: "expansion-events(edge n=32 alpha=0.4)".into(),
        checks: report.checks.len(),
        failures,
        pass: failures == 0,
        detail: format!(
            "{} inconclusive at this scale",
            report
                .checks
                .iter()
                .filter(|c| c.verdict == EventVerdict::Inconclusive)
                .count()
        ),
    });

    // Pairwise-dependence guarantee on built-in node models.
    let mut rng = trial_rng(seed, "pairwise", 0, 0);
    let mut checks = 0usize;
    let mut failures = 0usize;
    let triangle = build_random_walk(&MobilityGraph::cycle(3), 8, &AnalyticsConfig::default())?;
    let meeting = point_meeting_model(8)?;
    for nm in [&triangle, &meeting] {
        let rep = nm.verify_pairwise_dependence(&[1, 2, 3], samples.max(1000), &mut rng)?;
        checks += rep.entries.len();
        failures += rep.entries.iter().filter(|e| !e.pass).count();
    }
    suites.push(SuiteResult {
        suite: "pairwise-dependence(17η)".into(),
        checks,
        failures,
        pass: failures == 0,
        detail: "exact enumeration plus Monte Carlo at stationarity".into(),
    });

    let all_pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport {
        seed,
        samples,
        suites,
        all_pass,
    })
}
