//! Sweep configuration and its flat `key = value` text format.
//!
//! ```text
//! # desk-scale sweep
//! master_seed = 20191015
//! n_items = 200
//! horizon = 20
//! gamma_grid = 0, 1, 5
//! regimes = no_recommendation, recommendation, oracle
//! ```
//!
//! Lists are comma-separated. Keys left out keep their desk-scale default;
//! unknown or repeated keys are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::product_model::ModelParams;
use crate::regime::Regime;

/// Sweeps with more trajectories than this log a work-estimate warning.
pub const LARGE_SWEEP_TRAJECTORIES: u64 = 1_000_000;

pub const KEYS: [&str; 13] = [
    "master_seed",
    "n_items",
    "horizon",
    "populations",
    "users_per_population",
    "gamma_grid",
    "sigma_grid",
    "rho_grid",
    "beta_grid",
    "sigma_bar",
    "sigma_i",
    "regimes",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub master_seed: u64,
    pub n_items: usize,
    pub horizon: usize,
    pub populations: usize,
    pub users_per_population: usize,
    pub gamma_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub sigma_bar: f64,
    /// Idiosyncratic scale. `None` ties it to each grid point's `sigma`.
    pub sigma_i: Option<f64>,
    pub regimes: Vec<Regime>,
    pub output_dir: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::desk()
    }
}

/// One enumerated parameter point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub grid_id: usize,
    pub params: ModelParams,
}

impl SweepConfig {
    /// 20 populations × 50 users on a 3·1·3·3 grid.
    pub fn desk() -> Self {
        Self {
            master_seed: 20191015,
            n_items: 200,
            horizon: 20,
            populations: 20,
            users_per_population: 50,
            gamma_grid: vec![0.0, 1.0, 5.0],
            sigma_grid: vec![1.0],
            rho_grid: vec![0.0, 0.5, 0.9],
            beta_grid: vec![0.0, 1.0, 5.0],
            sigma_bar: 1.0,
            sigma_i: None,
            regimes: Regime::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
        }
    }

    /// Full grid: 100 populations × 100 users over 5·5·6·6 parameter points.
    pub fn paper_scale() -> Self {
        Self {
            populations: 100,
            users_per_population: 100,
            gamma_grid: vec![0.0, 0.3, 0.6, 1.0, 5.0],
            sigma_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            rho_grid: vec![0.0, 0.1, 0.3, 0.5, 0.7, 0.9],
            beta_grid: vec![0.0, 0.4, 0.8, 1.0, 2.0, 5.0],
            ..Self::desk()
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SimError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Parses config text on top of the desk defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::desk();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SimError::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(SimError::config(key, "key given more than once"));
            }
            cfg.set(key, value.trim())?;
            seen.push(key.to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "master_seed" => self.master_seed = parse_scalar(key, value)?,
            "n_items" => self.n_items = parse_scalar(key, value)?,
            "horizon" => self.horizon = parse_scalar(key, value)?,
            "populations" => self.populations = parse_scalar(key, value)?,
            "users_per_population" => self.users_per_population = parse_scalar(key, value)?,
            "gamma_grid" => self.gamma_grid = parse_list(key, value)?,
            "sigma_grid" => self.sigma_grid = parse_list(key, value)?,
            "rho_grid" => self.rho_grid = parse_list(key, value)?,
            "beta_grid" => self.beta_grid = parse_list(key, value)?,
            "sigma_bar" => self.sigma_bar = parse_scalar(key, value)?,
            "sigma_i" => {
                self.sigma_i = match value {
                    "" | "tied" => None,
                    v => Some(parse_scalar(key, v)?),
                }
            }
            "regimes" => {
                let mut regimes = value
                    .split(',')
                    .map(|s| s.trim().parse::<Regime>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| SimError::config(key, e.to_string()))?;
                regimes.sort();
                regimes.dedup();
                self.regimes = regimes;
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => {
                return Err(SimError::config(
                    other,
                    format!("unknown key; expected one of {}", KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` override string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            SimError::config(assignment, "override must have the form KEY=VALUE")
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_items", self.n_items),
            ("horizon", self.horizon),
            ("populations", self.populations),
            ("users_per_population", self.users_per_population),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(SimError::config(key, "must be positive"));
            }
        }
        if self.horizon < 2 {
            return Err(SimError::config("horizon", "must be at least 2 for distance metrics"));
        }
        if self.horizon > self.n_items {
            return Err(SimError::config(
                "horizon",
                format!("{} exceeds n_items {}", self.horizon, self.n_items),
            ));
        }
        if self.regimes.is_empty() {
            return Err(SimError::config("regimes", "at least one regime is required"));
        }
        for (key, grid) in [
            ("gamma_grid", &self.gamma_grid),
            ("sigma_grid", &self.sigma_grid),
            ("rho_grid", &self.rho_grid),
            ("beta_grid", &self.beta_grid),
        ] {
            if grid.is_empty() {
                return Err(SimError::config(key, "grid must not be empty"));
            }
        }
        let checks: [(&str, &[f64], fn(f64) -> bool, &str); 4] = [
            ("gamma_grid", &self.gamma_grid, |v| v >= 0.0, ">= 0"),
            ("sigma_grid", &self.sigma_grid, |v| v > 0.0, "> 0"),
            ("rho_grid", &self.rho_grid, |v| (0.0..1.0).contains(&v), "in [0, 1)"),
            ("beta_grid", &self.beta_grid, |v| v >= 0.0, ">= 0"),
        ];
        for (key, grid, ok, rule) in checks {
            if let Some(bad) = grid.iter().find(|v| !v.is_finite() || !ok(**v)) {
                return Err(SimError::config(key, format!("value {bad} must be {rule}")));
            }
        }
        if !(self.sigma_bar.is_finite() && self.sigma_bar >= 0.0) {
            return Err(SimError::config("sigma_bar", "must be finite and >= 0"));
        }
        if let Some(s) = self.sigma_i {
            if !(s.is_finite() && s > 0.0) {
                return Err(SimError::config("sigma_i", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Grid points in gamma, sigma, rho, beta order (beta varies fastest).
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &gamma in &self.gamma_grid {
            for &sigma in &self.sigma_grid {
                for &rho in &self.rho_grid {
                    for &beta in &self.beta_grid {
                        out.push(GridPoint {
                            grid_id: out.len(),
                            params: ModelParams {
                                n_items: self.n_items,
                                horizon: self.horizon,
                                gamma,
                                sigma,
                                sigma_i: self.sigma_i.unwrap_or(sigma),
                                sigma_bar: self.sigma_bar,
                                rho,
                                beta,
                            },
                        });
                    }
                }
            }
        }
        out
    }

    pub fn grid_size(&self) -> usize {
        self.gamma_grid.len() * self.sigma_grid.len() * self.rho_grid.len() * self.beta_grid.len()
    }

    pub fn trajectory_count(&self) -> u64 {
        (self.grid_size() * self.populations * self.users_per_population * self.regimes.len())
            as u64
    }

    /// Warning text for sweeps large enough to take hours.
    pub fn work_warning(&self) -> Option<String> {
        let count = self.trajectory_count();
        (count > LARGE_SWEEP_TRAJECTORIES).then(|| {
            format!(
                "sweep has {count} trajectories over {} grid points; expect a long run (try `estimate` first)",
                self.grid_size()
            )
        })
    }

    /// Renders the config in the same text format `parse` reads.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "n_items = {}", self.n_items);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "populations = {}", self.populations);
        let _ = writeln!(s, "users_per_population = {}", self.users_per_population);
        let _ = writeln!(s, "gamma_grid = {}", list(&self.gamma_grid));
        let _ = writeln!(s, "sigma_grid = {}", list(&self.sigma_grid));
        let _ = writeln!(s, "rho_grid = {}", list(&self.rho_grid));
        let _ = writeln!(s, "beta_grid = {}", list(&self.beta_grid));
        let _ = writeln!(s, "sigma_bar = {}", self.sigma_bar);
        match self.sigma_i {
            Some(v) => {
                let _ = writeln!(s, "sigma_i = {v}");
            }
            None => {
                let _ = writeln!(s, "sigma_i = tied");
            }
        }
        let regimes: Vec<&str> = self.regimes.iter().map(|r| r.as_str()).collect();
        let _ = writeln!(s, "regimes = {}", regimes.join(", "));
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| SimError::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Err(SimError::config(key, "grid must not be empty"));
    }
    value.split(',').map(|v| parse_scalar(key, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_counts() {
        let cfg = SweepConfig::desk();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid_size(), 27);
        assert_eq!(cfg.trajectory_count(), 3 * 20 * 50 * 27);
        assert!(cfg.work_warning().is_none());
    }

    #[test]
    fn paper_scale_counts() {
        let cfg = SweepConfig::paper_scale();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid_size(), 900);
        assert_eq!(cfg.trajectory_count(), 27_000_000);
        assert!(cfg.work_warning().is_some());
    }

    #[test]
    fn parse_and_round_trip() {
        let text = "\
# comment
master_seed = 7
n_items = 50   # trailing
horizon = 10
gamma_grid = 0, 0.5
rho_grid = 0.9
regimes = oracle, no_recommendation
sigma_i = 2
output_dir = /tmp/x
";
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.n_items, 50);
        assert_eq!(cfg.gamma_grid, vec![0.0, 0.5]);
        assert_eq!(cfg.regimes, vec![Regime::NoRecommendation, Regime::Oracle]);
        assert_eq!(cfg.sigma_i, Some(2.0));
        assert_eq!(cfg.grid()[0].params.sigma_i, 2.0);
        assert_eq!(SweepConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_hard_error() {
        match SweepConfig::parse("gama_grid = 1").unwrap_err() {
            SimError::Config { key, .. } => assert_eq!(key, "gama_grid"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn invalid_grid_value_names_key() {
        match SweepConfig::parse("rho_grid = 0, 1.0").unwrap_err() {
            SimError::Config { key, .. } => assert_eq!(key, "rho_grid"),
            e => panic!("{e:?}"),
        }
        assert!(SweepConfig::parse("n_items = 10\nhorizon = 20").is_err());
        assert!(SweepConfig::parse("regimes = partial").is_err());
        assert!(SweepConfig::parse("horizon = 5\nhorizon = 6").is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = SweepConfig::desk();
        cfg.apply_override("rho_grid=0").unwrap();
        assert_eq!(cfg.rho_grid, vec![0.0]);
        assert!(cfg.apply_override("bogus=1").is_err());
        assert!(cfg.apply_override("no_equals").is_err());
    }

    #[test]
    fn grid_enumeration_order() {
        let cfg = SweepConfig::desk();
        let grid = cfg.grid();
        assert_eq!(grid[1].params.beta, 1.0);
        assert_eq!(grid[3].params.rho, 0.5);
        assert_eq!(grid[9].params.gamma, 1.0);
        assert!(grid.iter().enumerate().all(|(i, g)| g.grid_id == i));
        assert!(grid.iter().all(|g| g.params.sigma_i == g.params.sigma));
    }
}
