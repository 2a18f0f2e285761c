//! The circular product space, its exponential-decay covariance kernel, and
//! sampling of ground-truth values and prior beliefs for whole populations.
//!
//! Items `0..n_items` sit on a ring. Values of nearby items are correlated
//! through the kernel `scale² · ρ^d(n, m)`, where `d` is the ring distance.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SimError};
use crate::seeding::derive_seed;

/// Eigenvalues above `-EIGEN_CLAMP_REL * scale²` are treated as float noise
/// and clamped to zero when factoring a kernel.
pub const EIGEN_CLAMP_REL: f64 = 1e-10;

/// One point of the model's parameter space.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub n_items: usize,
    pub horizon: usize,
    /// CARA risk aversion.
    pub gamma: f64,
    /// Scale of the common-value component.
    pub sigma: f64,
    /// Scale of the idiosyncratic component.
    pub sigma_i: f64,
    /// Spread of users' prior means.
    pub sigma_bar: f64,
    /// Correlation decay per unit of ring distance.
    pub rho: f64,
    /// Weight of the common-value component in realized values.
    pub beta: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::Input(msg));
        if self.n_items == 0 {
            return bad("n_items must be positive".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if self.horizon > self.n_items {
            return bad(format!(
                "horizon {} exceeds n_items {}",
                self.horizon, self.n_items
            ));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be finite and > 0, got {}", self.sigma));
        }
        if !(self.sigma_i.is_finite() && self.sigma_i > 0.0) {
            return bad(format!("sigma_i must be finite and > 0, got {}", self.sigma_i));
        }
        if !(self.sigma_bar.is_finite() && self.sigma_bar >= 0.0) {
            return bad(format!(
                "sigma_bar must be finite and >= 0, got {}",
                self.sigma_bar
            ));
        }
        check_rho(self.rho)?;
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..1.0).contains(&rho) {
        Ok(())
    } else {
        Err(SimError::Input(format!("rho must lie in [0, 1), got {rho}")))
    }
}

/// Ring distance `min(|m - n|, N - |m - n|)`.
pub fn circular_distance(n: usize, m: usize, n_items: usize) -> Result<usize> {
    if n >= n_items || m >= n_items {
        return Err(SimError::Input(format!(
            "item index out of range: ({n}, {m}) with n_items = {n_items}"
        )));
    }
    Ok(ring_distance(n, m, n_items))
}

/// Unchecked ring distance for indices already known to be in range.
#[inline]
pub(crate) fn ring_distance(n: usize, m: usize, n_items: usize) -> usize {
    let diff = n.abs_diff(m);
    diff.min(n_items - diff)
}

/// Kernel matrix with entry `(n, m) = scale_sq * rho^d(n, m)`.
pub fn build_covariance(scale_sq: f64, rho: f64, n_items: usize) -> Result<DMatrix<f64>> {
    check_rho(rho)?;
    if !(scale_sq.is_finite() && scale_sq > 0.0) {
        return Err(SimError::Input(format!(
            "scale_sq must be finite and > 0, got {scale_sq}"
        )));
    }
    if n_items == 0 {
        return Err(SimError::Input("n_items must be positive".into()));
    }
    // Powers by distance, shared by every entry.
    let decay: Vec<f64> = (0..=n_items / 2)
        .map(|d| scale_sq * rho.powi(d as i32))
        .collect();
    Ok(DMatrix::from_fn(n_items, n_items, |n, m| {
        decay[ring_distance(n, m, n_items)]
    }))
}

/// A symmetric square root `L` of a covariance (`L Lᵀ = Σ`) used to draw
/// correlated Gaussian vectors.
#[derive(Debug, Clone)]
pub struct GaussianFactor {
    factor: DMatrix<f64>,
}

impl GaussianFactor {
    /// Factors `cov` via its eigendecomposition. Eigenvalues slightly below
    /// zero (down to `-EIGEN_CLAMP_REL * scale_sq`) are clamped to zero.
    pub fn new(cov: &DMatrix<f64>, scale_sq: f64) -> Result<Self> {
        let eigen = SymmetricEigen::new(cov.clone());
        let floor = -EIGEN_CLAMP_REL * scale_sq;
        let mut roots = DVector::zeros(eigen.eigenvalues.len());
        for (i, &lambda) in eigen.eigenvalues.iter().enumerate() {
            if lambda < floor {
                return Err(SimError::Numerical(format!(
                    "covariance has eigenvalue {lambda:e} below tolerance {floor:e}"
                )));
            }
            roots[i] = lambda.max(0.0).sqrt();
        }
        let mut factor = eigen.eigenvectors;
        for (j, mut col) in factor.column_iter_mut().enumerate() {
            col *= roots[j];
        }
        Ok(Self { factor })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// Draws `mean + L z` with `z` standard normal.
    pub fn sample<R: rand::Rng + ?Sized>(&self, mean: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        mean + &self.factor * z
    }
}

/// Both kernels of one parameter point, with their sampling factors.
/// Built once per grid point and shared read-only.
#[derive(Debug, Clone)]
pub struct Kernels {
    pub params: ModelParams,
    /// Σ, covariance of the common-value vector.
    pub common: DMatrix<f64>,
    /// Σ_i, covariance of each user's idiosyncratic vector.
    pub idiosyncratic: DMatrix<f64>,
    common_factor: GaussianFactor,
    idiosyncratic_factor: GaussianFactor,
}

impl Kernels {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_items;
        let common_sq = params.sigma * params.sigma;
        let idio_sq = params.sigma_i * params.sigma_i;
        let common = build_covariance(common_sq, params.rho, n)?;
        let idiosyncratic = build_covariance(idio_sq, params.rho, n)?;
        let common_factor = GaussianFactor::new(&common, common_sq)?;
        let idiosyncratic_factor = GaussianFactor::new(&idiosyncratic, idio_sq)?;
        Ok(Self {
            params: *params,
            common,
            idiosyncratic,
            common_factor,
            idiosyncratic_factor,
        })
    }
}

/// Ground truth for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGroundTruth {
    /// V_i
    pub idiosyncratic_values: DVector<f64>,
    /// V̄_i, the mean of the user's prior over V_i.
    pub prior_means: DVector<f64>,
    /// X_i = V_i + βV
    pub realized_values: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// V, shared by every user of the population.
    pub common_values: DVector<f64>,
    pub users: Vec<UserGroundTruth>,
    pub population_id: u64,
    pub seed: u64,
}

/// Draws one population. Deterministic in `(params, users_per_population, seed)`.
pub fn sample_population(
    params: &ModelParams,
    users_per_population: usize,
    seed: u64,
) -> Result<Population> {
    let kernels = Kernels::new(params)?;
    sample_population_with(&kernels, users_per_population, 0, seed)
}

/// Like [`sample_population`] but with prebuilt kernels.
pub fn sample_population_with(
    kernels: &Kernels,
    users_per_population: usize,
    population_id: u64,
    seed: u64,
) -> Result<Population> {
    if users_per_population == 0 {
        return Err(SimError::Input("users_per_population must be positive".into()));
    }
    let params = &kernels.params;
    let n = params.n_items;
    let zero = DVector::zeros(n);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["common".into()]));
    let common_values = kernels.common_factor.sample(&zero, &mut rng);

    let users = (0..users_per_population)
        .map(|u| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, &["user".into(), (u as u64).into()]));
            let prior_means = DVector::from_fn(n, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                params.sigma_bar * z
            });
            let idiosyncratic_values = kernels.idiosyncratic_factor.sample(&prior_means, &mut rng);
            let realized_values = &idiosyncratic_values + params.beta * &common_values;
            UserGroundTruth {
                idiosyncratic_values,
                prior_means,
                realized_values,
            }
        })
        .collect();

    Ok(Population {
        common_values,
        users,
        population_id,
        seed,
    })
}

/// Writes a population as CSV with columns
/// `user_id, item, v_common, v_idio, prior_mean, realized`.
pub fn write_population_csv(population: &Population, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| SimError::io(path, e);
    writeln!(out, "user_id,item,v_common,v_idio,prior_mean,realized").map_err(io)?;
    for (u, user) in population.users.iter().enumerate() {
        for n in 0..population.common_values.len() {
            writeln!(
                out,
                "{u},{n},{},{},{},{}",
                population.common_values[n],
                user.idiosyncratic_values[n],
                user.prior_means[n],
                user.realized_values[n]
            )
            .map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, rho: f64, beta: f64) -> ModelParams {
        ModelParams {
            n_items: n,
            horizon: n.min(5),
            gamma: 1.0,
            sigma: 1.0,
            sigma_i: 1.0,
            sigma_bar: 1.0,
            rho,
            beta,
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(circular_distance(0, 2, 4).unwrap(), 2);
        assert_eq!(circular_distance(0, 3, 4).unwrap(), 1);
        assert_eq!(circular_distance(7, 7, 13).unwrap(), 0);
        assert_eq!(circular_distance(0, 199, 200).unwrap(), 1);
        assert!(matches!(circular_distance(4, 0, 4), Err(SimError::Input(_))));
    }

    #[test]
    fn covariance_matches_worked_example() {
        let cov = build_covariance(1.0, 0.5, 4).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.5, 0.25, 0.5, //
                0.5, 1.0, 0.5, 0.25, //
                0.25, 0.5, 1.0, 0.5, //
                0.5, 0.25, 0.5, 1.0,
            ],
        );
        assert_eq!(cov, expected);
    }

    #[test]
    fn zero_rho_is_scaled_identity() {
        let cov = build_covariance(2.5, 0.0, 7).unwrap();
        assert_eq!(cov, DMatrix::identity(7, 7) * 2.5);
    }

    #[test]
    fn rho_out_of_range_rejected() {
        assert!(build_covariance(1.0, 1.0, 4).is_err());
        assert!(build_covariance(1.0, -0.1, 4).is_err());
    }

    #[test]
    fn strongly_correlated_kernel_is_positive_definite() {
        let cov = build_covariance(2.0, 0.9, 50).unwrap();
        let eig = SymmetricEigen::new(cov).eigenvalues;
        assert!(eig.min() > 0.0, "min eigenvalue {}", eig.min());
    }

    #[test]
    fn zero_beta_makes_realized_equal_idiosyncratic() {
        let pop = sample_population(&params(20, 0.5, 0.0), 4, 11).unwrap();
        for user in &pop.users {
            assert_eq!(user.realized_values, user.idiosyncratic_values);
        }
    }

    #[test]
    fn realized_is_exact_sum() {
        let p = params(30, 0.7, 2.0);
        let pop = sample_population(&p, 3, 5).unwrap();
        for user in &pop.users {
            for n in 0..30 {
                assert_eq!(
                    user.realized_values[n],
                    user.idiosyncratic_values[n] + p.beta * pop.common_values[n]
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = params(40, 0.9, 1.0);
        let a = sample_population(&p, 5, 1234).unwrap();
        let b = sample_population(&p, 5, 1234).unwrap();
        assert_eq!(a, b);
        let c = sample_population(&p, 5, 1235).unwrap();
        assert_ne!(a.common_values, c.common_values);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params(10, 0.5, 1.0);
        p.horizon = 11;
        assert!(p.validate().is_err());
        let mut p = params(10, 0.5, 1.0);
        p.sigma = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn population_csv_dump() {
        let pop = sample_population(&params(5, 0.5, 1.0), 2, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pop.csv");
        write_population_csv(&pop, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "user_id,item,v_common,v_idio,prior_mean,realized");
        assert_eq!(lines.len(), 1 + 2 * 5);
    }
}
