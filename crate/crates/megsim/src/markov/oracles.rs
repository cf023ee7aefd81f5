//! Probability-inequality oracles used by the statistical test suites.
//!
//! Three inequalities back the concentration arguments behind the flooding
//! bounds; each is evaluated here exactly (finite supports, dynamic-program
//! tail sums), never by sampling, so tests can assert them literally:
//!
//! * Paley–Zygmund: `P(X ≥ θ E[X]) ≥ (1 − θ²) E[X]² / E[X²]` for `X ≥ 0`;
//! * binomial domination: binary steps with conditional success probability
//!   at least `p` satisfy `P(Σ Y_i ≤ k) ≤ P(B(n, p) ≤ k)`;
//! * Chernoff lower tail: `P(X < (1 − δ)μ) < exp(−δ²μ/2)` for a sum of
//!   independent binary variables with mean `μ`.
//!
//! These utilities feed property tests; the bound formulas themselves never
//! call them.

use rand::Rng;
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("Paley–Zygmund requires nonnegative values, found {0}")]
    NegativeValue(f64),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Both sides of one inequality instance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InequalityCheck {
    pub name: String,
    /// The guaranteed side (tail probability or bound target).
    pub lhs: f64,
    /// The bounding side.
    pub rhs: f64,
    pub holds: bool,
}

const EVAL_SLACK: f64 = 1e-12;

/// Coefficient variant of the Paley–Zygmund bound.
///
/// Only the classic `(1 − θ)²` constant is a theorem for every nonnegative
/// variable with the `≥ θE[X]` tail; the stronger-looking `(1 − θ²)`
/// constant sometimes quoted fails on small two-atom instances (see the
/// tests), so property suites use [`PzForm::Classic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PzForm {
    /// `P(X ≥ θE[X]) ≥ (1 − θ)² E[X]²/E[X²]`.
    Classic,
    /// `P(X ≥ θE[X]) ≥ (1 − θ²) E[X]²/E[X²]`; not universally valid.
    OneMinusThetaSq,
}

/// Exact Paley–Zygmund evaluation on a finite nonnegative support given as
/// `(value, probability)` atoms.
pub fn paley_zygmund_check(
    support: &[(f64, f64)],
    theta: f64,
    form: PzForm,
) -> Result<InequalityCheck, OracleError> {
    if !(0.0 < theta && theta < 1.0) {
        return Err(OracleError::InvalidParameter(format!(
            "theta = {theta} outside (0, 1)"
        )));
    }
    let mut mass = 0.0;
    for &(v, p) in support {
        if v < 0.0 {
            return Err(OracleError::NegativeValue(v));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(OracleError::InvalidProbability(p));
        }
        mass += p;
    }
    if (mass - 1.0).abs() > 1e-9 {
        return Err(OracleError::InvalidParameter(format!(
            "support mass {mass} != 1"
        )));
    }
    let mean: f64 = support.iter().map(|&(v, p)| v * p).sum();
    let second: f64 = support.iter().map(|&(v, p)| v * v * p).sum();
    let lhs: f64 = support
        .iter()
        .filter(|&&(v, _)| v >= theta * mean)
        .map(|&(_, p)| p)
        .sum();
    let coeff = match form {
        PzForm::Classic => (1.0 - theta) * (1.0 - theta),
        PzForm::OneMinusThetaSq => 1.0 - theta * theta,
    };
    let rhs = if second > 0.0 {
        coeff * mean * mean / second
    } else {
        0.0 // X ≡ 0: the inequality is vacuous.
    };
    Ok(InequalityCheck {
        name: format!("paley_zygmund(theta={theta}, {form:?})"),
        lhs,
        rhs,
        holds: lhs >= rhs - EVAL_SLACK,
    })
}

/// CDF `P(X ≤ k)` of a sum of independent Bernoulli steps, by dynamic
/// programming over the exact probability mass function.
pub fn poisson_binomial_cdf(step_probs: &[f64], k: i64) -> Result<f64, OracleError> {
    for &p in step_probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(OracleError::InvalidProbability(p));
        }
    }
    if k < 0 {
        return Ok(0.0);
    }
    let n = step_probs.len();
    if k as usize >= n {
        return Ok(1.0);
    }
    let mut pmf = vec![0.0f64; n + 1];
    pmf[0] = 1.0;
    for (i, &p) in step_probs.iter().enumerate() {
        for j in (0..=i + 1).rev() {
            let stay = if j <= i { pmf[j] * (1.0 - p) } else { 0.0 };
            let up = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + up;
        }
    }
    Ok(pmf[..=(k as usize)].iter().sum())
}

/// CDF of `B(n, p)` at `k`.
pub fn binomial_cdf(n: usize, p: f64, k: i64) -> Result<f64, OracleError> {
    poisson_binomial_cdf(&vec![p; n], k)
}

/// Domination check: steps with success probability `≥ p` (here independent
/// Bernoulli with the given per-step probabilities) cannot have a heavier
/// lower tail than `B(n, p)`.
pub fn binomial_domination_check(
    step_probs: &[f64],
    p: f64,
    k: i64,
) -> Result<InequalityCheck, OracleError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(OracleError::InvalidProbability(p));
    }
    for &q in step_probs {
        if q < p - 1e-15 {
            return Err(OracleError::InvalidParameter(format!(
                "step probability {q} below the floor {p}"
            )));
        }
    }
    let lhs = poisson_binomial_cdf(step_probs, k)?;
    let rhs = binomial_cdf(step_probs.len(), p, k)?;
    Ok(InequalityCheck {
        name: format!("binomial_domination(n={}, p={p}, k={k})", step_probs.len()),
        lhs,
        rhs,
        holds: lhs <= rhs + EVAL_SLACK,
    })
}

/// Chernoff lower-tail check on a sum of independent Bernoulli steps:
/// exact `P(X < (1 − δ)μ)` against `exp(−δ²μ/2)`.
pub fn chernoff_lower_tail_check(
    step_probs: &[f64],
    delta: f64,
) -> Result<InequalityCheck, OracleError> {
    if delta <= 0.0 {
        return Err(OracleError::InvalidParameter(format!(
            "delta = {delta} must be positive"
        )));
    }
    let mu: f64 = step_probs.iter().sum();
    let threshold = (1.0 - delta) * mu;
    // P(X < t) over integers: everything at or below ceil(t) − 1 for integer
    // t, floor(t) otherwise.
    let k = if threshold <= 0.0 {
        -1
    } else if (threshold.fract()).abs() < 1e-12 {
        threshold.round() as i64 - 1
    } else {
        threshold.floor() as i64
    };
    let lhs = poisson_binomial_cdf(step_probs, k)?;
    let rhs = (-delta * delta * mu / 2.0).exp();
    Ok(InequalityCheck {
        name: format!("chernoff(mu={mu:.4}, delta={delta})"),
        lhs,
        rhs,
        holds: lhs <= rhs + EVAL_SLACK,
    })
}

/// Outcome of a batch of inequality checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OracleReport {
    pub checks: Vec<InequalityCheck>,
    pub all_hold: bool,
}

impl OracleReport {
    pub fn from_checks(checks: Vec<InequalityCheck>) -> Self {
        let all_hold = checks.iter().all(|c| c.holds);
        Self { checks, all_hold }
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Evaluates `count` random exhaustively-evaluable instances of each of the
/// three inequalities.
pub fn random_oracle_suite(count: usize, rng: &mut dyn RngCore) -> OracleReport {
    let mut checks = Vec::with_capacity(count * 3);
    for _ in 0..count {
        // Paley–Zygmund on a random small support.
        let atoms = rng.random_range(1..=6usize);
        let mut weights: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let support: Vec<(f64, f64)> = weights
            .iter()
            .map(|&w| (rng.random_range(0.0..10.0), w))
            .collect();
        let theta = rng.random_range(0.05..0.95);
        checks.push(paley_zygmund_check(&support, theta, PzForm::Classic).expect("valid instance"));

        // Binomial domination with per-step probabilities at least p.
        let n = rng.random_range(1..=24usize);
        let p = rng.random_range(0.05..0.9);
        let steps: Vec<f64> = (0..n).map(|_| rng.random_range(p..1.0)).collect();
        let k = rng.random_range(0..=(n as i64));
        checks.push(binomial_domination_check(&steps, p, k).expect("valid instance"));

        // Chernoff lower tail.
        let n = rng.random_range(1..=24usize);
        let steps: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
        let delta = rng.random_range(0.05..1.0);
        checks.push(chernoff_lower_tail_check(&steps, delta).expect("valid instance"));
    }
    OracleReport::from_checks(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn constant_variable_passes_paley_zygmund() {
        // X ≡ c > 0, θ = 1/2: left side 1, strong-form right side 3/4.
        let c = paley_zygmund_check(&[(2.0, 1.0)], 0.5, PzForm::OneMinusThetaSq).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert!((c.rhs - 0.75).abs() < 1e-15);
        assert!(c.holds);
        let c = paley_zygmund_check(&[(2.0, 1.0)], 0.5, PzForm::Classic).unwrap();
        assert!((c.rhs - 0.25).abs() < 1e-15);
        assert!(c.holds);
    }

    #[test]
    fn uniform_three_point_case() {
        // X uniform on {0, 1, 2}, θ = 1/2: P(X ≥ 1/2) = 2/3 vs 0.45.
        let third = 1.0 / 3.0;
        let c = paley_zygmund_check(
            &[(0.0, third), (1.0, third), (2.0, third)],
            0.5,
            PzForm::OneMinusThetaSq,
        )
        .unwrap();
        assert!((c.lhs - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.rhs - 0.45).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn strong_form_fails_on_a_two_atom_instance() {
        // X = 1 w.p. 0.6, X = 2 w.p. 0.4, θ = 0.72: tail 0.4 < 0.429, so the
        // (1 − θ²) coefficient is not a theorem; the classic constant holds.
        let support = [(1.0, 0.6), (2.0, 0.4)];
        let strong = paley_zygmund_check(&support, 0.72, PzForm::OneMinusThetaSq).unwrap();
        assert!(!strong.holds, "expected counterexample, got {strong:?}");
        let classic = paley_zygmund_check(&support, 0.72, PzForm::Classic).unwrap();
        assert!(classic.holds);
    }

    #[test]
    fn negative_support_is_rejected() {
        let err = paley_zygmund_check(&[(-1.0, 1.0)], 0.5, PzForm::Classic).unwrap_err();
        assert!(matches!(err, OracleError::NegativeValue(_)));
    }

    #[test]
    fn chernoff_on_b_10_half() {
        // B(10, 0.5), threshold 2: δ = 0.6, bound exp(−0.9) ≈ 0.4066 dominates
        // the exact tail P(X < 2) = 11/1024.
        let c = chernoff_lower_tail_check(&[0.5; 10], 0.6).unwrap();
        assert!((c.lhs - 11.0 / 1024.0).abs() < 1e-12, "lhs = {}", c.lhs);
        assert!((c.rhs - (-0.9f64).exp()).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn binomial_cdf_small_cases() {
        assert!((binomial_cdf(3, 0.5, 1).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(binomial_cdf(3, 0.5, -1).unwrap(), 0.0);
        assert_eq!(binomial_cdf(3, 0.5, 3).unwrap(), 1.0);
    }

    #[test]
    fn domination_holds_on_random_suite() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let report = random_oracle_suite(250, &mut rng);
        assert!(
            report.all_hold,
            "failures: {:?}",
            report.failures().collect::<Vec<_>>()
        );
    }
}
