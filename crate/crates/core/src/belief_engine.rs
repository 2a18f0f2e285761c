//! Gaussian beliefs over not-yet-consumed items.
//!
//! The production path conditions one observation at a time with a rank-one
//! update and drops the observed item from the state. [`batch_condition`] is
//! the partitioned-Gaussian conditional over a whole observation set and is
//! kept as an independent reference for the sequential path.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, SimError};
use crate::product_model::{Kernels, ModelParams, UserGroundTruth};
use crate::regime::Regime;

/// Observed variances at or below this are treated as already known.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;
/// Negative posterior variances down to this are float noise and clamp to 0.
pub const NEGATIVE_VARIANCE_SLACK: f64 = 1e-9;
/// Largest condition number accepted for the observed block in [`batch_condition`].
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    /// Unconsumed items; `mean` and `cov` are aligned with this order.
    pub remaining: Vec<usize>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub consumed_count: usize,
}

impl BeliefState {
    /// A fresh belief over items `0..mean.len()`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(SimError::Input(format!(
                "covariance is {}x{} but mean has length {n}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        Ok(Self {
            remaining: (0..n).collect(),
            mean,
            cov,
            consumed_count: 0,
        })
    }

    pub fn n_items(&self) -> usize {
        self.remaining.len() + self.consumed_count
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining.is_empty()
    }

    /// Position of `item` within `remaining`.
    pub fn position(&self, item: usize) -> Result<usize> {
        self.remaining
            .iter()
            .position(|&r| r == item)
            .ok_or_else(|| SimError::Input(format!("item {item} is not among the remaining items")))
    }

    /// Certainty equivalent of the item at `pos` in `remaining`.
    #[inline]
    pub(crate) fn ce_at(&self, pos: usize, gamma: f64) -> f64 {
        self.mean[pos] - 0.5 * gamma * self.cov[(pos, pos)]
    }

    /// Conditions on `item` having realized `observed`, then removes it.
    pub fn condition(&mut self, item: usize, observed: f64) -> Result<()> {
        let k = self.position(item)?;
        let m = self.remaining.len();
        let s = self.cov[(k, k)];
        let skip = |i: usize| if i < k { i } else { i + 1 };

        if s > DEGENERATE_VARIANCE {
            let gain = (observed - self.mean[k]) / s;
            let inv_s = 1.0 / s;
            let col: Vec<f64> = self.cov.column(k).iter().copied().collect();
            let mean = DVector::from_fn(m - 1, |i, _| {
                let i = skip(i);
                self.mean[i] + col[i] * gain
            });
            // Rank-one downdate fused with dropping row/column k. The product
            // c_i * c_j is formed first so the result is bitwise symmetric.
            let src = self.cov.as_slice();
            let mut data = Vec::with_capacity((m - 1) * (m - 1));
            for j in (0..m).filter(|&j| j != k) {
                let cj = col[j];
                let column = &src[j * m..(j + 1) * m];
                for range in [0..k, k + 1..m] {
                    data.extend(
                        column[range.clone()]
                            .iter()
                            .zip(&col[range])
                            .map(|(&v, &ci)| v - (ci * cj) * inv_s),
                    );
                }
            }
            let mut cov = DMatrix::from_vec(m - 1, m - 1, data);
            for i in 0..m - 1 {
                let v = cov[(i, i)];
                if v < -NEGATIVE_VARIANCE_SLACK {
                    return Err(SimError::Numerical(format!(
                        "posterior variance {v:e} for item {} after observing item {item}",
                        self.remaining[skip(i)]
                    )));
                }
                if v < 0.0 {
                    cov[(i, i)] = 0.0;
                }
            }
            self.mean = mean;
            self.cov = cov;
        } else {
            let mean = std::mem::replace(&mut self.mean, DVector::zeros(0));
            let cov = std::mem::replace(&mut self.cov, DMatrix::zeros(0, 0));
            self.mean = mean.remove_row(k);
            self.cov = cov.remove_row(k).remove_column(k);
        }
        self.remaining.remove(k);
        self.consumed_count += 1;
        Ok(())
    }
}

/// Initial belief of `user` under `regime`.
///
/// * no recommendation: mean V̄_i, covariance Σ_i + β²Σ
/// * recommendation: mean V̄_i + βV, covariance Σ_i
/// * oracle: mean X_i, zero covariance
pub fn init_beliefs(
    user: &UserGroundTruth,
    common_values: &DVector<f64>,
    params: &ModelParams,
    regime: Regime,
) -> Result<BeliefState> {
    let kernels = Kernels::new(params)?;
    init_beliefs_with(&kernels, user, common_values, regime)
}

pub fn init_beliefs_with(
    kernels: &Kernels,
    user: &UserGroundTruth,
    common_values: &DVector<f64>,
    regime: Regime,
) -> Result<BeliefState> {
    let n = kernels.params.n_items;
    let beta = kernels.params.beta;
    for (name, len) in [
        ("common_values", common_values.len()),
        ("prior_means", user.prior_means.len()),
        ("idiosyncratic_values", user.idiosyncratic_values.len()),
        ("realized_values", user.realized_values.len()),
    ] {
        if len != n {
            return Err(SimError::Input(format!(
                "{name} has length {len}, expected n_items = {n}"
            )));
        }
    }
    let (mean, cov) = match regime {
        Regime::NoRecommendation => (
            user.prior_means.clone(),
            &kernels.idiosyncratic + (beta * beta) * &kernels.common,
        ),
        Regime::Recommendation => (
            &user.prior_means + beta * common_values,
            kernels.idiosyncratic.clone(),
        ),
        Regime::Oracle => (user.realized_values.clone(), DMatrix::zeros(n, n)),
    };
    BeliefState::new(mean, cov)
}

pub fn condition_on_observation(
    mut state: BeliefState,
    item: usize,
    observed: f64,
) -> Result<BeliefState> {
    state.condition(item, observed)?;
    Ok(state)
}

/// Conditional mean and covariance over the unobserved items (ascending
/// index order) given the values of `observed_items`, computed in one shot
/// from the partitioned prior.
pub fn batch_condition(
    prior_mean: &DVector<f64>,
    prior_cov: &DMatrix<f64>,
    observed_items: &[usize],
    observed_values: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = prior_mean.len();
    if prior_cov.shape() != (n, n) {
        return Err(SimError::Input(format!(
            "covariance shape {:?} does not match mean length {n}",
            prior_cov.shape()
        )));
    }
    if observed_items.len() != observed_values.len() {
        return Err(SimError::Input(format!(
            "{} observed items but {} observed values",
            observed_items.len(),
            observed_values.len()
        )));
    }
    let mut is_observed = vec![false; n];
    for &item in observed_items {
        if item >= n {
            return Err(SimError::Input(format!("observed item {item} out of range")));
        }
        if std::mem::replace(&mut is_observed[item], true) {
            return Err(SimError::Input(format!("observed item {item} listed twice")));
        }
    }
    if observed_items.is_empty() {
        return Ok((prior_mean.clone(), prior_cov.clone()));
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !is_observed[i]).collect();
    let t = observed_items.len();

    let obs_block = DMatrix::from_fn(t, t, |a, b| {
        prior_cov[(observed_items[a], observed_items[b])]
    });
    let cross = DMatrix::from_fn(rest.len(), t, |r, a| prior_cov[(rest[r], observed_items[a])]);
    let rest_block = DMatrix::from_fn(rest.len(), rest.len(), |r, q| prior_cov[(rest[r], rest[q])]);
    let residual = DVector::from_fn(t, |a, _| observed_values[a] - prior_mean[observed_items[a]]);

    let singular = |detail: String| {
        SimError::Numerical(format!(
            "observed-item covariance block over items {observed_items:?} is singular: {detail}"
        ))
    };
    let eig = SymmetricEigen::new(obs_block.clone()).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if lo <= 0.0 {
        return Err(singular(format!("smallest eigenvalue {lo:e}")));
    }
    if hi / lo > MAX_CONDITION {
        return Err(singular(format!("condition number {:e}", hi / lo)));
    }
    let chol = obs_block
        .cholesky()
        .ok_or_else(|| singular("Cholesky factorization failed".into()))?;

    let weights = chol.solve(&cross.transpose()); // Σ_tt⁻¹ Σ_(t,rest)
    let mean = DVector::from_fn(rest.len(), |r, _| prior_mean[rest[r]])
        + cross.clone() * chol.solve(&residual);
    let cov = rest_block - cross * weights;
    Ok((mean, cov))
}

/// `mean[item] - gamma/2 * cov[item, item]`.
pub fn certainty_equivalent(state: &BeliefState, item: usize, gamma: f64) -> Result<f64> {
    let pos = state.position(item)?;
    Ok(state.ce_at(pos, gamma))
}
