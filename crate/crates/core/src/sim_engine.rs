//! Parameter sweeps: population sampling, paired regime rollouts and the
//! flat-file outputs.
//!
//! Work is split into (grid point, population) units that run in parallel.
//! Every random stream is derived from the master seed and the unit's
//! labels, and results are collected in enumeration order, so the output
//! does not depend on the number of worker threads.
//!
//! Each finished grid point is also written as a shard under
//! `<output_dir>/shards/<fingerprint>/`. A rerun of the same config picks
//! finished shards up instead of recomputing them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::config::GridPoint;
use crate::config::SweepConfig;
use crate::error::{Result, SimError};
use crate::metrics::MetricTables;
use crate::policy::{run_trajectory_with, Trajectory};
use crate::product_model::{ring_distance, sample_population_with, Kernels, ModelParams};
use crate::regime::Regime;
use crate::seeding::{derive_seed, SeedLabel};

pub const TRAJECTORIES_CSV: &str = "trajectories.csv";
pub const PER_USER_CSV: &str = "per_user_metrics.csv";
pub const PER_PERIOD_CSV: &str = "per_period_metrics.csv";
pub const HOMOGENEITY_CSV: &str = "homogeneity.csv";
pub const CORRELATIONS_CSV: &str = "correlations.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub grid_id: usize,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct RunDataset {
    pub config: SweepConfig,
    pub grid: Vec<GridPoint>,
    /// Ordered by grid point, population, user, regime.
    pub records: Vec<TrajectoryRecord>,
    pub tables: MetricTables,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowCounts {
    pub trajectories: usize,
    pub per_user_metrics: usize,
    pub per_period_metrics: usize,
    pub homogeneity: usize,
    pub correlations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub master_seed: u64,
    pub fingerprint: String,
    pub config: SweepConfig,
    pub grid: Vec<GridPoint>,
    pub row_counts: RowCounts,
}

/// One row of `trajectories.csv`; column order is fixed by field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrajectoryRow {
    grid_id: usize,
    gamma: f64,
    sigma: f64,
    rho: f64,
    beta: f64,
    population_id: u64,
    user_id: u64,
    regime: Regime,
    t: usize,
    item: usize,
    realized_value: f64,
    distance_from_prev: Option<usize>,
    certainty_equivalent_at_choice: f64,
}

/// Independent seed of population `population_id` at one parameter point.
pub fn population_seed(master: u64, params: &ModelParams, population_id: u64) -> u64 {
    let labels: [SeedLabel; 10] = [
        params.gamma.into(),
        params.sigma.into(),
        params.sigma_i.into(),
        params.rho.into(),
        params.beta.into(),
        params.sigma_bar.into(),
        params.n_items.into(),
        params.horizon.into(),
        "population".into(),
        population_id.into(),
    ];
    derive_seed(master, &labels)
}

/// Tie-break seed of one user, shared by all regimes.
pub fn tie_seed(population_seed: u64, user_id: u64) -> u64 {
    derive_seed(population_seed, &[user_id.into(), "ties".into()])
}

fn run_population(
    config: &SweepConfig,
    kernels: &Kernels,
    grid_id: usize,
    population_id: u64,
) -> Result<Vec<TrajectoryRecord>> {
    let seed = population_seed(config.master_seed, &kernels.params, population_id);
    let population = sample_population_with(kernels, config.users_per_population, population_id, seed)?;
    let mut out = Vec::with_capacity(population.users.len() * config.regimes.len());
    for (u, user) in population.users.iter().enumerate() {
        let user_id = u as u64;
        let ties = tie_seed(seed, user_id);
        for &regime in &config.regimes {
            let trajectory = run_trajectory_with(
                kernels,
                user,
                &population.common_values,
                regime,
                ties,
                user_id,
                population_id,
            )?;
            out.push(TrajectoryRecord { grid_id, trajectory });
        }
    }
    Ok(out)
}

/// All trajectories of one grid point, populations in parallel.
pub fn simulate_grid_point(config: &SweepConfig, point: &GridPoint) -> Result<Vec<TrajectoryRecord>> {
    let kernels = Kernels::new(&point.params)?;
    let chunks = (0..config.populations as u64)
        .into_par_iter()
        .map(|p| run_population(config, &kernels, point.grid_id, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Runs the whole sweep in memory without touching the filesystem.
pub fn simulate(config: &SweepConfig) -> Result<RunDataset> {
    config.validate()?;
    if let Some(w) = config.work_warning() {
        log::warn!("{w}");
    }
    let grid = config.grid();
    let parts = grid
        .par_iter()
        .map(|g| simulate_grid_point(config, g))
        .collect::<Result<Vec<_>>>()?;
    finish(config.clone(), grid, parts.into_iter().flatten().collect())
}

fn finish(config: SweepConfig, grid: Vec<GridPoint>, records: Vec<TrajectoryRecord>) -> Result<RunDataset> {
    let tables = MetricTables::compute(&grid, &records)?;
    Ok(RunDataset {
        config,
        grid,
        records,
        tables,
    })
}

/// Runs the sweep, resuming from any finished shards in `output_dir`, and
/// writes every output file there.
pub fn run_sweep(config: &SweepConfig) -> Result<RunDataset> {
    config.validate()?;
    if let Some(w) = config.work_warning() {
        log::warn!("{w}");
    }
    let out_dir = &config.output_dir;
    let shard_dir = out_dir.join("shards").join(fingerprint(config));
    fs::create_dir_all(&shard_dir).map_err(|e| SimError::io(&shard_dir, e))?;

    let grid = config.grid();
    let parts = grid
        .par_iter()
        .map(|g| {
            let path = shard_dir.join(format!("grid_{:05}.csv", g.grid_id));
            if path.exists() {
                log::info!("grid point {} resumed from {}", g.grid_id, path.display());
                return read_trajectories(&path, &grid);
            }
            let records = simulate_grid_point(config, g)?;
            let tmp = path.with_extension("csv.partial");
            write_trajectories(&tmp, &grid, &records)?;
            fs::rename(&tmp, &path).map_err(|e| SimError::io(&path, e))?;
            log::info!("grid point {} done", g.grid_id);
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;

    let dataset = finish(config.clone(), grid, parts.into_iter().flatten().collect())?;
    write_outputs(&dataset, out_dir)?;
    Ok(dataset)
}

/// Hex digest identifying everything that determines a sweep's results.
pub fn fingerprint(config: &SweepConfig) -> String {
    let mut c = config.clone();
    c.output_dir = PathBuf::new();
    format!("{:016x}", derive_seed(config.master_seed, &[c.to_text().as_str().into()]))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::io::BufWriter<fs::File>>> {
    let file = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    Ok(csv::Writer::from_writer(std::io::BufWriter::new(file)))
}

fn csv_error(path: &Path, e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::io(path, io),
        other => SimError::Data {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

fn write_trajectories(path: &Path, grid: &[GridPoint], records: &[TrajectoryRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for rec in records {
        let p = &grid[rec.grid_id].params;
        let t = &rec.trajectory;
        for k in 0..t.len() {
            let row = TrajectoryRow {
                grid_id: rec.grid_id,
                gamma: p.gamma,
                sigma: p.sigma,
                rho: p.rho,
                beta: p.beta,
                population_id: t.population_id,
                user_id: t.user_id,
                regime: t.regime,
                t: k + 1,
                item: t.items[k],
                realized_value: t.realized[k],
                distance_from_prev: (k > 0)
                    .then(|| ring_distance(t.items[k - 1], t.items[k], p.n_items)),
                certainty_equivalent_at_choice: t.choice_ce[k],
            };
            w.serialize(&row).map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// Reads trajectory rows back into records. Rows of one trajectory must be
/// contiguous and in period order.
pub fn read_trajectories(path: &Path, grid: &[GridPoint]) -> Result<Vec<TrajectoryRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let bad = |message: String| SimError::Data {
        path: path.to_path_buf(),
        message,
    };
    let mut out: Vec<TrajectoryRecord> = Vec::new();
    for row in reader.deserialize::<TrajectoryRow>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let p = grid
            .get(row.grid_id)
            .ok_or_else(|| bad(format!("unknown grid_id {}", row.grid_id)))?
            .params;
        if row.item >= p.n_items {
            return Err(bad(format!("item {} out of range", row.item)));
        }
        let continues = out.last().is_some_and(|r| {
            r.grid_id == row.grid_id
                && r.trajectory.population_id == row.population_id
                && r.trajectory.user_id == row.user_id
                && r.trajectory.regime == row.regime
                && row.t > 1
        });
        if !continues {
            if row.t != 1 {
                return Err(bad(format!("trajectory starts at period {}", row.t)));
            }
            out.push(TrajectoryRecord {
                grid_id: row.grid_id,
                trajectory: Trajectory {
                    regime: row.regime,
                    items: Vec::with_capacity(p.horizon),
                    realized: Vec::with_capacity(p.horizon),
                    choice_ce: Vec::with_capacity(p.horizon),
                    user_id: row.user_id,
                    population_id: row.population_id,
                },
            });
        }
        let t = &mut out.last_mut().expect("pushed above").trajectory;
        if row.t != t.len() + 1 {
            return Err(bad(format!("period {} follows period {}", row.t, t.len())));
        }
        t.items.push(row.item);
        t.realized.push(row.realized_value);
        t.choice_ce.push(row.certainty_equivalent_at_choice);
    }
    Ok(out)
}

/// Writes the trajectory and metric CSVs plus the manifest into `dir`.
pub fn write_outputs(dataset: &RunDataset, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    write_trajectories(&dir.join(TRAJECTORIES_CSV), &dataset.grid, &dataset.records)?;
    write_metric_tables(&dataset.tables, dir)?;
    let manifest = build_manifest(dataset);
    let path = dir.join(MANIFEST_JSON);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| SimError::Data {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let mut f = fs::File::create(&path).map_err(|e| SimError::io(&path, e))?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| SimError::io(&path, e))?;
    Ok(manifest)
}

pub fn write_metric_tables(tables: &MetricTables, dir: &Path) -> Result<()> {
    write_rows(&dir.join(PER_USER_CSV), &tables.per_user)?;
    write_rows(&dir.join(PER_PERIOD_CSV), &tables.per_period)?;
    write_rows(&dir.join(HOMOGENEITY_CSV), &tables.homogeneity)?;
    write_rows(&dir.join(CORRELATIONS_CSV), &tables.correlations)
}

fn build_manifest(dataset: &RunDataset) -> Manifest {
    let trajectory_rows = dataset.records.iter().map(|r| r.trajectory.len()).sum();
    Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        master_seed: dataset.config.master_seed,
        fingerprint: fingerprint(&dataset.config),
        config: dataset.config.clone(),
        grid: dataset.grid.clone(),
        row_counts: RowCounts {
            trajectories: trajectory_rows,
            per_user_metrics: dataset.tables.per_user.len(),
            per_period_metrics: dataset.tables.per_period.len(),
            homogeneity: dataset.tables.homogeneity.len(),
            correlations: dataset.tables.correlations.len(),
        },
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_JSON);
    let text = fs::read_to_string(&path).map_err(|e| SimError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| SimError::Data {
        path,
        message: e.to_string(),
    })
}

/// Rebuilds a dataset (and recomputes its metric tables) from a run directory.
pub fn load_dataset(dir: &Path) -> Result<RunDataset> {
    let manifest = read_manifest(dir)?;
    let grid = manifest.config.grid();
    if grid != manifest.grid {
        return Err(SimError::Data {
            path: dir.join(MANIFEST_JSON),
            message: "grid enumeration does not match the config echo".into(),
        });
    }
    let records = read_trajectories(&dir.join(TRAJECTORIES_CSV), &grid)?;
    finish(manifest.config, grid, records)
}
