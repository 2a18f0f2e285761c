use std::process::{Command, Output};

fn bubblesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bubblesim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: [&str; 14] = [
    "--set", "n_items=30",
    "--set", "horizon=5",
    "--set", "populations=2",
    "--set", "users_per_population=4",
    "--set", "gamma_grid=0,1",
    "--set", "rho_grid=0.5",
    "--set", "beta_grid=1",
];

/// Summary rows keyed by regime: (mean_distance, mean_distance_ci).
fn distances(summary: &str) -> Vec<(String, f64, f64)> {
    let mut lines = summary.lines().skip_while(|l| !l.starts_with("regime\t"));
    let header: Vec<&str> = lines.next().expect("summary header").split('\t').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (d, ci) = (col("mean_distance"), col("mean_distance_ci"));
    lines
        .take_while(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[d].parse().unwrap(), f[ci].parse().unwrap())
        })
        .collect()
}

#[test]
fn verify_example_passes() {
    let out = bubblesim(&["verify-example"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("0 failed"));
    assert!(!text.contains("FAIL\t"));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = bubblesim(&["run", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/definitely/not/here.cfg"));
}

#[test]
fn unknown_override_key_is_rejected() {
    let out = bubblesim(&["estimate", "--set", "no_such_key=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no_such_key"));
}

#[test]
fn small_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let mut args = vec!["--workers", "2", "run", "--out", out_dir.to_str().unwrap()];
    args.extend(SMALL);
    let out = bubblesim(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in [
        "trajectories.csv",
        "per_user_metrics.csv",
        "per_period_metrics.csv",
        "homogeneity.csv",
        "correlations.csv",
        "manifest.json",
    ] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    // 2 grid points × 2 populations × 4 users × 3 regimes × 5 periods
    let rows = std::fs::read_to_string(out_dir.join("trajectories.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 2 * 4 * 3 * 5);
    assert_eq!(distances(&stdout(&out)).len(), 3);
}

#[test]
fn aggregate_reproduces_metric_tables() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let mut args = vec!["run", "--out", run_dir.to_str().unwrap()];
    args.extend(SMALL);
    let run = bubblesim(&args);
    assert!(run.status.success(), "{}", stderr(&run));

    let again = dir.path().join("again");
    let agg = bubblesim(&[
        "aggregate",
        run_dir.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(agg.status.success(), "{}", stderr(&agg));
    for f in ["per_user_metrics.csv", "per_period_metrics.csv", "homogeneity.csv", "correlations.csv"] {
        assert_eq!(
            std::fs::read(run_dir.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f} differs"
        );
    }
    assert_eq!(distances(&stdout(&run)), distances(&stdout(&agg)));
}

#[test]
fn aggregate_of_missing_directory_is_an_io_error() {
    let out = bubblesim(&["aggregate", "/definitely/not/a/run"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rho_zero_regimes_agree_on_distance() {
    let dir = tempfile::tempdir().unwrap();
    let out = bubblesim(&[
        "run",
        "--out",
        dir.path().join("rho0").to_str().unwrap(),
        "--set",
        "rho_grid=0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = distances(&stdout(&out));
    assert_eq!(rows.len(), 3);
    for a in &rows {
        for b in &rows {
            assert!(
                (a.1 - b.1).abs() <= a.2 + b.2,
                "{} {:.3}±{:.3} vs {} {:.3}±{:.3}",
                a.0, a.1, a.2, b.0, b.1, b.2
            );
        }
    }
}

#[test]
fn estimate_reports_desk_and_extra_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("paper.cfg");
    std::fs::write(&cfg, "populations = 100\nusers_per_population = 100\n").unwrap();
    let out = bubblesim(&["estimate", "--also", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("trajectories\t81000"), "{text}");
    assert!(text.contains("trajectories\t810000"), "{text}");
}
