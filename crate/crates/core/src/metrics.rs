//! Trajectory metrics and their aggregates: consecutive consumption
//! distance, diversity, welfare, homogeneity, the diversity-welfare
//! correlation and the value of recommendation.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::policy::Trajectory;
use crate::product_model::{circular_distance, ModelParams};
use crate::regime::Regime;
use crate::sim_engine::{GridPoint, TrajectoryRecord};

/// z-value for a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Sample mean with a 95% normal-approximation half width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub value: f64,
    pub ci_half_width: f64,
    pub n: usize,
}

impl MetricRecord {
    pub fn lower(&self) -> f64 {
        self.value - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.ci_half_width
    }
}

/// Distance between each pair of consecutively consumed items.
pub fn consecutive_distance_series(traj: &Trajectory, n_items: usize) -> Result<Vec<f64>> {
    if traj.len() < 2 {
        return Err(SimError::Input(
            "consecutive distances need at least two consumed items".into(),
        ));
    }
    traj.items
        .windows(2)
        .map(|w| circular_distance(w[0], w[1], n_items).map(|d| d as f64))
        .collect()
}

/// Mean ring distance over ordered pairs of distinct consumed items,
/// normalized by `n_items`. Lies in `[0, 1/2]`.
pub fn diversity(traj: &Trajectory, n_items: usize) -> Result<f64> {
    let t = traj.len();
    if t < 2 {
        return Err(SimError::Input("diversity needs at least two consumed items".into()));
    }
    let mut unordered = 0usize;
    for a in 0..t {
        for b in a + 1..t {
            unordered += circular_distance(traj.items[a], traj.items[b], n_items)?;
        }
    }
    let ordered = 2 * unordered;
    Ok(ordered as f64 / (n_items as f64 * (t * (t - 1)) as f64))
}

/// Mean realized value. Values are summed in descending order so the result
/// depends only on the multiset of values, and a set that dominates another
/// element-wise (after sorting) never gets a smaller welfare through rounding.
pub fn welfare(traj: &Trajectory) -> Result<f64> {
    if traj.realized.is_empty() {
        return Err(SimError::Input("welfare of an empty trajectory".into()));
    }
    let mut values = traj.realized.clone();
    values.sort_by(|a, b| b.total_cmp(a));
    let total = values.iter().fold(0.0, |acc, v| acc + v);
    Ok(total / values.len() as f64)
}

/// `|a ∩ b| / |a ∪ b|` of the item sets.
pub fn jaccard(a: &[usize], b: &[usize]) -> Result<f64> {
    let a: HashSet<usize> = a.iter().copied().collect();
    let b: HashSet<usize> = b.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return Err(SimError::Input("jaccard index of two empty sets".into()));
    }
    Ok(a.intersection(&b).count() as f64 / union as f64)
}

/// Mean pairwise Jaccard index of the consumed sets.
pub fn homogeneity(trajs: &[&Trajectory]) -> Result<f64> {
    let n = trajs.len();
    if n < 2 {
        return Err(SimError::Input(format!(
            "homogeneity needs at least two users, got {n}"
        )));
    }
    let sets: Vec<BTreeSet<usize>> = trajs
        .iter()
        .map(|t| t.items.iter().copied().collect())
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let union = sets[i].union(&sets[j]).count();
            if union == 0 {
                return Err(SimError::Input("jaccard index of two empty sets".into()));
            }
            total += sets[i].intersection(&sets[j]).count() as f64 / union as f64;
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// Welfare gain of the recommendation trajectory over the paired
/// no-recommendation trajectory of the same user.
pub fn recommendation_value(traj_rec: &Trajectory, traj_norec: &Trajectory) -> Result<f64> {
    if traj_rec.user_id != traj_norec.user_id || traj_rec.population_id != traj_norec.population_id
    {
        return Err(SimError::Input(format!(
            "trajectories belong to different users: (population {}, user {}) vs (population {}, user {})",
            traj_rec.population_id, traj_rec.user_id, traj_norec.population_id, traj_norec.user_id
        )));
    }
    Ok(welfare(traj_rec)? - welfare(traj_norec)?)
}

pub fn aggregate_with_ci(values: &[f64]) -> Result<MetricRecord> {
    let n = values.len();
    if n == 0 {
        return Err(SimError::Input("cannot aggregate an empty sample".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ci_half_width = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Z_95 * var.sqrt() / (n as f64).sqrt()
    };
    Ok(MetricRecord {
        value: mean,
        ci_half_width,
        n,
    })
}

pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SimError::Input(format!(
            "correlation inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(SimError::Input("correlation needs at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(SimError::Numerical(
            "correlation undefined: an input has zero variance".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

// ---------------------------------------------------------------------------
// Tables written by the sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerUserRow {
    pub grid_id: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub population_id: u64,
    pub user_id: u64,
    pub regime: Regime,
    pub diversity: f64,
    pub welfare: f64,
    pub rec_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPeriodRow {
    pub grid_id: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub regime: Regime,
    pub t: usize,
    pub mean_distance: f64,
    pub ci_half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityRow {
    pub grid_id: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub regime: Regime,
    pub population_id: u64,
    pub homogeneity: f64,
}

/// Diversity-welfare correlation, either for one grid point (`scope =
/// "grid"`) or pooled over every grid point sharing `gamma` (`scope =
/// "pooled"`, grid columns empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub scope: String,
    pub grid_id: Option<usize>,
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
    pub beta: Option<f64>,
    pub regime: Regime,
    pub gamma: f64,
    pub pearson_r: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MetricTables {
    pub per_user: Vec<PerUserRow>,
    pub per_period: Vec<PerPeriodRow>,
    pub homogeneity: Vec<HomogeneityRow>,
    pub correlations: Vec<CorrelationRow>,
}

fn params_of(grid: &[GridPoint], grid_id: usize) -> Result<&ModelParams> {
    grid.get(grid_id)
        .map(|g| &g.params)
        .ok_or_else(|| SimError::Input(format!("unknown grid_id {grid_id}")))
}

impl MetricTables {
    /// Computes every table from raw trajectory records.
    pub fn compute(grid: &[GridPoint], records: &[TrajectoryRecord]) -> Result<Self> {
        // (grid, population, user) -> regime -> trajectory
        let mut by_user: BTreeMap<(usize, u64, u64), BTreeMap<Regime, &Trajectory>> =
            BTreeMap::new();
        for rec in records {
            let t = &rec.trajectory;
            by_user
                .entry((rec.grid_id, t.population_id, t.user_id))
                .or_default()
                .insert(t.regime, t);
        }

        let mut per_user = Vec::with_capacity(records.len());
        for (&(grid_id, population_id, user_id), regimes) in &by_user {
            let p = params_of(grid, grid_id)?;
            let rec_value = match (
                regimes.get(&Regime::Recommendation),
                regimes.get(&Regime::NoRecommendation),
            ) {
                (Some(r), Some(n)) => Some(recommendation_value(r, n)?),
                _ => None,
            };
            for (&regime, traj) in regimes {
                per_user.push(PerUserRow {
                    grid_id,
                    gamma: p.gamma,
                    sigma: p.sigma,
                    rho: p.rho,
                    beta: p.beta,
                    population_id,
                    user_id,
                    regime,
                    diversity: diversity(traj, p.n_items)?,
                    welfare: welfare(traj)?,
                    rec_value,
                });
            }
        }

        // (grid, regime) -> per-period distance samples
        let mut distances: BTreeMap<(usize, Regime), Vec<Vec<f64>>> = BTreeMap::new();
        // (grid, regime, population) -> trajectories
        let mut groups: BTreeMap<(usize, Regime, u64), Vec<&Trajectory>> = BTreeMap::new();
        for rec in records {
            let t = &rec.trajectory;
            let p = params_of(grid, rec.grid_id)?;
            let series = consecutive_distance_series(t, p.n_items)?;
            let slots = distances.entry((rec.grid_id, t.regime)).or_default();
            if slots.len() < series.len() {
                slots.resize(series.len(), Vec::new());
            }
            for (k, d) in series.into_iter().enumerate() {
                slots[k].push(d);
            }
            groups
                .entry((rec.grid_id, t.regime, t.population_id))
                .or_default()
                .push(t);
        }

        let mut per_period = Vec::new();
        for (&(grid_id, regime), slots) in &distances {
            let p = params_of(grid, grid_id)?;
            for (k, samples) in slots.iter().enumerate() {
                let agg = aggregate_with_ci(samples)?;
                per_period.push(PerPeriodRow {
                    grid_id,
                    gamma: p.gamma,
                    sigma: p.sigma,
                    rho: p.rho,
                    beta: p.beta,
                    regime,
                    t: k + 2,
                    mean_distance: agg.value,
                    ci_half_width: agg.ci_half_width,
                    n: agg.n,
                });
            }
        }

        let mut homogeneity_rows = Vec::new();
        for (&(grid_id, regime, population_id), trajs) in &groups {
            if trajs.len() < 2 {
                continue;
            }
            let p = params_of(grid, grid_id)?;
            homogeneity_rows.push(HomogeneityRow {
                grid_id,
                gamma: p.gamma,
                sigma: p.sigma,
                rho: p.rho,
                beta: p.beta,
                regime,
                population_id,
                homogeneity: homogeneity(trajs)?,
            });
        }

        let correlations = correlation_rows(grid, &per_user)?;

        Ok(Self {
            per_user,
            per_period,
            homogeneity: homogeneity_rows,
            correlations,
        })
    }
}

fn correlation_rows(grid: &[GridPoint], per_user: &[PerUserRow]) -> Result<Vec<CorrelationRow>> {
    let mut cells: BTreeMap<(usize, Regime), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    // keyed by gamma bit pattern; grid gammas are exact config values
    let mut pooled: BTreeMap<(Regime, u64), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in per_user {
        let cell = cells.entry((row.grid_id, row.regime)).or_default();
        cell.0.push(row.diversity);
        cell.1.push(row.welfare);
        let cell = pooled.entry((row.regime, row.gamma.to_bits())).or_default();
        cell.0.push(row.diversity);
        cell.1.push(row.welfare);
    }
    let r_or_none = |d: &[f64], w: &[f64]| pearson_correlation(d, w).ok();

    let mut rows = Vec::new();
    for (&(grid_id, regime), (d, w)) in &cells {
        let p = params_of(grid, grid_id)?;
        rows.push(CorrelationRow {
            scope: "grid".into(),
            grid_id: Some(grid_id),
            sigma: Some(p.sigma),
            rho: Some(p.rho),
            beta: Some(p.beta),
            regime,
            gamma: p.gamma,
            pearson_r: r_or_none(d, w),
            n: d.len(),
        });
    }
    let mut pooled_rows: Vec<CorrelationRow> = pooled
        .iter()
        .map(|(&(regime, gamma_bits), (d, w))| CorrelationRow {
            scope: "pooled".into(),
            grid_id: None,
            sigma: None,
            rho: None,
            beta: None,
            regime,
            gamma: f64::from_bits(gamma_bits),
            pearson_r: r_or_none(d, w),
            n: d.len(),
        })
        .collect();
    pooled_rows.sort_by(|a, b| {
        a.regime
            .cmp(&b.regime)
            .then(a.gamma.total_cmp(&b.gamma))
    });
    rows.extend(pooled_rows);
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Pooled slices across grid points

/// Which per-user quantity to pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserMetric {
    Diversity,
    Welfare,
    RecValue,
}

/// Per-period consecutive distance (periods 2..=T) for `regime`, pooled with
/// equal weight per trajectory over every grid point accepted by `select`.
pub fn pooled_distance_profile(
    grid: &[GridPoint],
    records: &[TrajectoryRecord],
    regime: Regime,
    select: impl Fn(&ModelParams) -> bool,
) -> Result<Vec<MetricRecord>> {
    let mut slots: Vec<Vec<f64>> = Vec::new();
    for rec in records {
        if rec.trajectory.regime != regime {
            continue;
        }
        let p = params_of(grid, rec.grid_id)?;
        if !select(p) {
            continue;
        }
        let series = consecutive_distance_series(&rec.trajectory, p.n_items)?;
        if slots.len() < series.len() {
            slots.resize(series.len(), Vec::new());
        }
        for (k, d) in series.into_iter().enumerate() {
            slots[k].push(d);
        }
    }
    if slots.is_empty() {
        return Err(SimError::Input(format!("no {regime} trajectories in the selection")));
    }
    slots.iter().map(|s| aggregate_with_ci(s)).collect()
}

/// Mean consecutive distance over all periods and trajectories, one sample
/// per trajectory (its own mean distance).
pub fn pooled_mean_distance(
    grid: &[GridPoint],
    records: &[TrajectoryRecord],
    regime: Regime,
    select: impl Fn(&ModelParams) -> bool,
) -> Result<MetricRecord> {
    let mut samples = Vec::new();
    for rec in records {
        if rec.trajectory.regime != regime {
            continue;
        }
        let p = params_of(grid, rec.grid_id)?;
        if !select(p) {
            continue;
        }
        let series = consecutive_distance_series(&rec.trajectory, p.n_items)?;
        samples.push(series.iter().sum::<f64>() / series.len() as f64);
    }
    aggregate_with_ci(&samples)
}

fn user_values(
    grid: &[GridPoint],
    rows: &[PerUserRow],
    regime: Regime,
    metric: UserMetric,
    select: &dyn Fn(&ModelParams) -> bool,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for row in rows.iter().filter(|r| r.regime == regime) {
        if !select(params_of(grid, row.grid_id)?) {
            continue;
        }
        match metric {
            UserMetric::Diversity => out.push(row.diversity),
            UserMetric::Welfare => out.push(row.welfare),
            UserMetric::RecValue => {
                if let Some(v) = row.rec_value {
                    out.push(v)
                }
            }
        }
    }
    Ok(out)
}

pub fn pooled_user_metric(
    grid: &[GridPoint],
    rows: &[PerUserRow],
    regime: Regime,
    metric: UserMetric,
    select: impl Fn(&ModelParams) -> bool,
) -> Result<MetricRecord> {
    aggregate_with_ci(&user_values(grid, rows, regime, metric, &select)?)
}

/// Pearson correlation of diversity against welfare across the selected users.
pub fn pooled_correlation(
    grid: &[GridPoint],
    rows: &[PerUserRow],
    regime: Regime,
    select: impl Fn(&ModelParams) -> bool,
) -> Result<(f64, usize)> {
    let d = user_values(grid, rows, regime, UserMetric::Diversity, &select)?;
    let w = user_values(grid, rows, regime, UserMetric::Welfare, &select)?;
    Ok((pearson_correlation(&d, &w)?, d.len()))
}

/// Homogeneity pooled with one sample per population.
pub fn pooled_homogeneity(
    grid: &[GridPoint],
    rows: &[HomogeneityRow],
    regime: Regime,
    select: impl Fn(&ModelParams) -> bool,
) -> Result<MetricRecord> {
    let mut values = Vec::new();
    for row in rows.iter().filter(|r| r.regime == regime) {
        if select(params_of(grid, row.grid_id)?) {
            values.push(row.homogeneity);
        }
    }
    aggregate_with_ci(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(items: Vec<usize>, realized: Vec<f64>) -> Trajectory {
        let n = items.len();
        Trajectory {
            regime: Regime::NoRecommendation,
            items,
            realized,
            choice_ce: vec![0.0; n],
            user_id: 0,
            population_id: 0,
        }
    }

    fn items_only(items: Vec<usize>) -> Trajectory {
        let n = items.len();
        traj(items, vec![0.0; n])
    }

    /// Brute-force mean over ordered pairs, written independently of
    /// `diversity`.
    fn diversity_oracle(items: &[usize], n_items: usize) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0.0;
        for &a in items {
            for &b in items {
                if a != b {
                    let diff = (a as i64 - b as i64).unsigned_abs() as usize;
                    total += diff.min(n_items - diff) as f64;
                    pairs += 1.0;
                }
            }
        }
        total / pairs / n_items as f64
    }

    #[test]
    fn consecutive_distances() {
        let t = items_only(vec![0, 5, 195]);
        assert_eq!(consecutive_distance_series(&t, 200).unwrap(), vec![5.0, 10.0]);
        let t = items_only((40..60).collect());
        assert!(consecutive_distance_series(&t, 200)
            .unwrap()
            .iter()
            .all(|&d| d == 1.0));
        assert!(consecutive_distance_series(&items_only(vec![3]), 200).is_err());
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity(&items_only(vec![0, 100]), 200).unwrap(), 0.5);
        assert_eq!(diversity(&items_only(vec![0, 3]), 6).unwrap(), 0.5);
        let block: Vec<usize> = (0..20).collect();
        let expected = diversity_oracle(&block, 200);
        assert!((expected - 0.035).abs() < 1e-15);
        assert!((diversity(&items_only(block), 200).unwrap() - 0.035).abs() < 1e-15);
        assert_eq!(diversity(&items_only(vec![9, 10]), 200).unwrap(), 1.0 / 200.0);
    }

    #[test]
    fn welfare_examples() {
        assert_eq!(welfare(&traj(vec![0, 1, 2], vec![1.0, 2.0, 3.0])).unwrap(), 2.0);
        assert_eq!(welfare(&traj(vec![0, 1], vec![0.0, 0.0])).unwrap(), 0.0);
        assert!(welfare(&traj(vec![], vec![])).is_err());
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&[1, 2, 3], &[3, 2, 1]).unwrap(), 1.0);
        assert_eq!(jaccard(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(jaccard(&[0, 1, 2], &[1, 2, 3]).unwrap(), 0.5);
        assert!(jaccard(&[], &[]).is_err());
    }

    #[test]
    fn homogeneity_examples() {
        let a = items_only(vec![1, 2, 3]);
        let b = items_only(vec![4, 5, 6]);
        let c = items_only(vec![7, 8, 9]);
        assert_eq!(homogeneity(&[&a, &a, &a]).unwrap(), 1.0);
        assert_eq!(homogeneity(&[&a, &b, &c]).unwrap(), 0.0);
        // pairwise jaccards 1, 0, 0
        assert!((homogeneity(&[&a, &a, &b]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(homogeneity(&[&a]).is_err());
    }

    #[test]
    fn recommendation_value_examples() {
        let a = traj(vec![0, 1], vec![1.0, 3.0]);
        assert_eq!(recommendation_value(&a, &a).unwrap(), 0.0);
        let norec = traj(vec![0, 1], vec![1.0, 2.0]);
        assert_eq!(recommendation_value(&a, &norec).unwrap(), 0.5);
        let mut other = norec.clone();
        other.user_id = 4;
        assert!(recommendation_value(&a, &other).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let r = aggregate_with_ci(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.value, r.ci_half_width, r.n), (1.0, 0.0, 3));
        let r = aggregate_with_ci(&[0.0, 2.0]).unwrap();
        assert_eq!(r.value, 1.0);
        assert!((r.ci_half_width - 1.96).abs() < 1e-12);
        let r = aggregate_with_ci(&[4.2]).unwrap();
        assert_eq!((r.ci_half_width, r.n), (0.0, 1));
        assert!(aggregate_with_ci(&[]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &y).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert!(matches!(
            pearson_correlation(&[1.0, 1.0], &[0.0, 1.0]),
            Err(SimError::Numerical(_))
        ));
    }

    fn distinct_items(n_items: usize) -> impl Strategy<Value = Vec<usize>> {
        prop::collection::btree_set(0..n_items, 2..20).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn diversity_matches_oracle_and_ignores_order(
            items in distinct_items(200),
            seed in any::<u64>(),
        ) {
            let d = diversity(&items_only(items.clone()), 200).unwrap();
            prop_assert!((d - diversity_oracle(&items, 200)).abs() < 1e-12);
            prop_assert!((0.0..=0.5).contains(&d));
            let mut shuffled = items.clone();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
            prop_assert_eq!(d, diversity(&items_only(shuffled), 200).unwrap());
        }

        #[test]
        fn distances_bounded(items in distinct_items(101)) {
            for d in consecutive_distance_series(&items_only(items), 101).unwrap() {
                prop_assert!(d <= 50.0);
            }
        }

        #[test]
        fn jaccard_symmetric(a in distinct_items(30), b in distinct_items(30)) {
            let ab = jaccard(&a, &b).unwrap();
            prop_assert_eq!(ab, jaccard(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            let (ta, tb) = (items_only(a), items_only(b));
            prop_assert_eq!(homogeneity(&[&ta, &tb]).unwrap(), homogeneity(&[&tb, &ta]).unwrap());
        }
    }
}
