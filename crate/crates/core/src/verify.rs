//! Self-check against the four-item worked example: items 0..3 on a ring,
//! zero prior means, unit variance, ρ = 0.5, first consumption of item 0.

use std::fmt;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::belief_engine::{certainty_equivalent, condition_on_observation, BeliefState};
use crate::error::Result;
use crate::policy::choose_next;
use crate::product_model::build_covariance;

pub const EXAMPLE_TOLERANCE: f64 = 1e-12;
/// Tie-break draws tried for each choice prediction.
const CHOICE_TRIALS: u64 = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub computed: String,
    pub expected: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn value(&mut self, name: impl Into<String>, computed: f64, expected: f64) {
        self.checks.push(Check {
            name: name.into(),
            computed: format!("{computed}"),
            expected: format!("{expected}"),
            passed: (computed - expected).abs() <= EXAMPLE_TOLERANCE,
        });
    }

    fn choice(&mut self, name: impl Into<String>, picks: Vec<usize>, allowed: &[usize]) {
        let mut distinct = picks.clone();
        distinct.sort_unstable();
        distinct.dedup();
        self.checks.push(Check {
            name: name.into(),
            computed: format!("{distinct:?}"),
            expected: format!("subset of {allowed:?}"),
            passed: picks.iter().all(|p| allowed.contains(p)),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{}\t{}\tcomputed={}\texpected={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.computed,
                c.expected
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Runs the worked example with the documented ρ = 0.5.
pub fn verify_example() -> Result<VerifyReport> {
    verify_example_with_rho(0.5)
}

/// Runs the worked example with an arbitrary ρ; the expected values stay
/// those of ρ = 0.5.
pub fn verify_example_with_rho(rho: f64) -> Result<VerifyReport> {
    let prior = BeliefState::new(DVector::zeros(4), build_covariance(1.0, rho, 4)?)?;
    let good = condition_on_observation(prior.clone(), 0, 0.5)?;
    let bad = condition_on_observation(prior, 0, -0.5)?;
    let mut report = VerifyReport::default();

    for (k, expected) in [0.25, 0.125, 0.25].into_iter().enumerate() {
        report.value(format!("posterior_mean[{}]", k + 1), good.mean[k], expected);
    }
    let expected_cov = [
        [0.75, 0.375, 0.0],
        [0.375, 0.9375, 0.375],
        [0.0, 0.375, 0.75],
    ];
    for (i, row) in expected_cov.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            report.value(
                format!("posterior_cov[{},{}]", i + 1, j + 1),
                good.cov[(i, j)],
                e,
            );
        }
    }
    report.value(
        "posterior_cov_after_bad_draw_unchanged",
        (&bad.cov - &good.cov).amax(),
        0.0,
    );

    // δ(1) = δ(2) solved for γ with y = -0.5
    let threshold = 2.0 * (bad.mean[0] - bad.mean[1]) / (bad.cov[(0, 0)] - bad.cov[(1, 1)]);
    report.value("indifference_gamma", threshold, 4.0 / 3.0);
    let gamma = 4.0 / 3.0;
    report.value(
        "ce_gap_at_4/3",
        certainty_equivalent(&bad, 1, gamma)? - certainty_equivalent(&bad, 2, gamma)?,
        0.0,
    );

    let picks = |state: &BeliefState, gamma: f64| -> Result<Vec<usize>> {
        (0..CHOICE_TRIALS)
            .map(|seed| choose_next(state, gamma, &mut ChaCha8Rng::seed_from_u64(seed)))
            .collect()
    };
    let mut good_picks = Vec::new();
    for gamma in [0.0, 0.3, 1.0, 4.0 / 3.0, 5.0] {
        good_picks.extend(picks(&good, gamma)?);
    }
    report.choice("choice_y=+0.5_any_gamma", good_picks, &[1, 3]);
    report.choice("choice_y=-0.5_gamma=0", picks(&bad, 0.0)?, &[2]);
    report.choice("choice_y=-0.5_gamma=5", picks(&bad, 5.0)?, &[1, 3]);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_passes() {
        let report = verify_example().unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.checks.len(), 3 + 9 + 1 + 2 + 3);
    }

    #[test]
    fn perturbed_rho_fails_threshold() {
        let report = verify_example_with_rho(0.4).unwrap();
        assert!(!report.passed());
        let threshold = report
            .checks
            .iter()
            .find(|c| c.name == "indifference_gamma")
            .unwrap();
        assert!(!threshold.passed);
    }

    #[test]
    fn report_lists_computed_and_expected() {
        let text = verify_example().unwrap().to_string();
        assert!(text.contains("PASS\tposterior_mean[1]\tcomputed=0.25\texpected=0.25"));
        assert!(text.ends_with("18 checks, 0 failed"));
    }
}
