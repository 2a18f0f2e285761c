//! Console summaries and work estimates.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use crate::config::SweepConfig;
use crate::error::Result;
use crate::metrics::{
    pooled_homogeneity, pooled_mean_distance, pooled_user_metric, MetricRecord, UserMetric,
};
use crate::policy::run_trajectory_with;
use crate::product_model::{sample_population_with, Kernels};
use crate::regime::Regime;
use crate::sim_engine::RunDataset;

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "regime",
    "n_users",
    "welfare",
    "welfare_ci",
    "diversity",
    "diversity_ci",
    "homogeneity",
    "homogeneity_ci",
    "mean_distance",
    "mean_distance_ci",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSummary {
    pub regime: Regime,
    pub welfare: MetricRecord,
    pub diversity: MetricRecord,
    /// `None` when populations have a single user.
    pub homogeneity: Option<MetricRecord>,
    pub mean_distance: MetricRecord,
}

/// Pools every grid point of the dataset, one row per regime.
pub fn summarize(ds: &RunDataset) -> Result<Vec<RegimeSummary>> {
    let all = |_: &_| true;
    ds.config
        .regimes
        .iter()
        .map(|&regime| {
            Ok(RegimeSummary {
                regime,
                welfare: pooled_user_metric(&ds.grid, &ds.tables.per_user, regime, UserMetric::Welfare, all)?,
                diversity: pooled_user_metric(&ds.grid, &ds.tables.per_user, regime, UserMetric::Diversity, all)?,
                homogeneity: pooled_homogeneity(&ds.grid, &ds.tables.homogeneity, regime, all).ok(),
                mean_distance: pooled_mean_distance(&ds.grid, &ds.records, regime, all)?,
            })
        })
        .collect()
}

/// Tab-separated table with a fixed header ([`SUMMARY_COLUMNS`]).
pub fn format_summary(rows: &[RegimeSummary]) -> String {
    let mut out = SUMMARY_COLUMNS.join("\t");
    out.push('\n');
    for r in rows {
        let (h, hci) = r
            .homogeneity
            .map(|h| (format!("{:.6}", h.value), format!("{:.6}", h.ci_half_width)))
            .unwrap_or_else(|| ("NA".into(), "NA".into()));
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{:.6}\t{:.6}",
            r.regime,
            r.welfare.n,
            r.welfare.value,
            r.welfare.ci_half_width,
            r.diversity.value,
            r.diversity.ci_half_width,
            h,
            hci,
            r.mean_distance.value,
            r.mean_distance.ci_half_width,
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkEstimate {
    pub grid_points: usize,
    pub trajectories: u64,
    /// T·N², the dominant cost of rank-one conditioning.
    pub flops_per_trajectory: u64,
    pub seconds_per_trajectory: f64,
    pub workers: usize,
    pub projected_seconds: f64,
}

impl WorkEstimate {
    pub fn render(&self) -> String {
        format!(
            "grid_points\t{}\ntrajectories\t{}\nflops_per_trajectory\t{}\nseconds_per_trajectory\t{:.3e}\nworkers\t{}\nprojected_wall_seconds\t{:.1}\n",
            self.grid_points,
            self.trajectories,
            self.flops_per_trajectory,
            self.seconds_per_trajectory,
            self.workers,
            self.projected_seconds
        )
    }
}

static CALIBRATIONS: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
static CALIBRATION_RUNS: AtomicUsize = AtomicUsize::new(0);

/// Number of timing runs performed so far in this process.
pub fn calibration_runs() -> usize {
    CALIBRATION_RUNS.load(Ordering::Relaxed)
}

/// Seconds per trajectory at the config's (N, T), timed once per process
/// for at most `budget` and cached.
pub fn calibrate(config: &SweepConfig, budget: Duration) -> Result<f64> {
    let key = (config.n_items, config.horizon);
    let cache = CALIBRATIONS.get_or_init(Default::default);
    if let Some(&s) = cache.lock().expect("calibration cache poisoned").get(&key) {
        return Ok(s);
    }
    CALIBRATION_RUNS.fetch_add(1, Ordering::Relaxed);
    let params = config.grid()[0].params;
    let kernels = Kernels::new(&params)?;
    let population = sample_population_with(&kernels, 8, 0, config.master_seed)?;
    let start = Instant::now();
    let mut done = 0u32;
    while done == 0 || start.elapsed() < budget {
        let user = &population.users[done as usize % population.users.len()];
        run_trajectory_with(
            &kernels,
            user,
            &population.common_values,
            Regime::NoRecommendation,
            done as u64,
            0,
            0,
        )?;
        done += 1;
    }
    let per = start.elapsed().as_secs_f64() / done as f64;
    cache.lock().expect("calibration cache poisoned").insert(key, per);
    Ok(per)
}

pub fn estimate(config: &SweepConfig, workers: usize, budget: Duration) -> Result<WorkEstimate> {
    config.validate()?;
    let per = calibrate(config, budget)?;
    let trajectories = config.trajectory_count();
    let workers = workers.max(1);
    let n = config.n_items as u64;
    Ok(WorkEstimate {
        grid_points: config.grid_size(),
        trajectories,
        flops_per_trajectory: config.horizon as u64 * n * n,
        seconds_per_trajectory: per,
        workers,
        projected_seconds: trajectories as f64 * per / workers as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_counts_and_cache() {
        let desk = SweepConfig::desk();
        let a = estimate(&desk, 4, Duration::from_millis(50)).unwrap();
        assert_eq!(a.trajectories, 27 * 20 * 50 * 3);
        assert_eq!(a.flops_per_trajectory, 20 * 200 * 200);
        let runs = calibration_runs();
        let paper = SweepConfig::paper_scale();
        let b = estimate(&paper, 4, Duration::from_millis(50)).unwrap();
        assert_eq!(b.trajectories, 27_000_000);
        assert_eq!(b.seconds_per_trajectory, a.seconds_per_trajectory);
        assert_eq!(calibration_runs(), runs);
        assert!(b.render().contains("trajectories\t27000000"));
    }
}
