use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;
use timeop_cli::ExperimentConfig;

fn timeop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timeop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn column(path: &Path, name: &str) -> usize {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn missing_subcommand_prints_usage_and_exits_2() {
    let out = timeop(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = timeop(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "grid_q = 3\n");
    let out = timeop(&["demo-interval", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_interval_passes_and_writes_both_files() {
    let dir = TempDir::new().unwrap();
    let out = timeop(&["demo-interval", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv_path = dir.path().join("demo_interval.csv");
    let rows = read_csv(&csv_path);
    assert_eq!(rows.len(), 5);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("demo_interval.json")).unwrap())
            .unwrap();
    assert_eq!(json["seed"], 20_240_601);
    assert!(json["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v["pass"] == true));
    assert!(json["relation"].as_str().unwrap().contains("eps"));
}

#[test]
fn uncertainty_products_follow_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "n_list = [2, 10, 100]\nbumps = []\n");
    let out = timeop(&["uncertainty", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = dir.path().join("uncertainty.csv");
    let (n_col, p_col) = (column(&path, "n"), column(&path, "product"));
    let rows = read_csv(&path);
    assert_eq!(rows.len(), 3);
    for row in rows {
        let n: f64 = row[n_col].parse().unwrap();
        let product: f64 = row[p_col].parse().unwrap();
        let expected = 0.5 * ((n + 0.5) / (n - 1.5)).sqrt();
        assert!(
            (product - expected).abs() < 1e-4,
            "n = {n}: {product} vs {expected}"
        );
    }
}

#[test]
fn survival_of_phi_2_matches_the_power_law() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "phi_n = [2]\nbumps = []\nt_count = 25\n");
    let out = timeop(&[
        "survival",
        &cfg,
        "--horizon",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = dir.path().join("survival.csv");
    let (t_col, p_col) = (column(&path, "t"), column(&path, "probability"));
    let rows = read_csv(&path);
    assert_eq!(rows.len(), 25);
    for row in rows {
        let t: f64 = row[t_col].parse().unwrap();
        let p: f64 = row[p_col].parse().unwrap();
        let exact = (1.0 + t * t / 16.0).powf(-2.5);
        assert!((p / exact - 1.0).abs() < 1e-6, "t = {t}: {p} vs {exact}");
    }
}

#[test]
fn same_config_and_seed_give_identical_csv() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let text = "phi_n = [2, 3]\nbumps = [[1.0, 2.0]]\nintervals = 40\nseed = 7\n";
    let cfg = write_config(a.path(), text);
    for dir in [&a, &b] {
        let out = timeop(&["bounds", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let x = fs::read(a.path().join("bounds.csv")).unwrap();
    let y = fs::read(b.path().join("bounds.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid_K = 16.0\ngrid_N = 1024\nseed = 1\nphi_n = [2]\nbumps = []\n",
    );
    let out = timeop(&[
        "survival",
        &cfg,
        "--grid-N",
        "2048",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("survival.json")).unwrap())
            .unwrap();
    assert_eq!(json["grid"]["count"], 2048);
    assert_eq!(json["grid"]["half_width"], 16.0);
    assert_eq!(json["seed"], 5);
}

#[test]
fn coarse_grid_fails_the_weyl_tolerance_with_exit_1() {
    let dir = TempDir::new().unwrap();
    let out = timeop(&[
        "weylrel",
        "--grid-K",
        "8",
        "--grid-N",
        "256",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("weylrel.csv").exists());
}

#[test]
fn short_horizon_budget_is_a_convergence_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "scatter_levels = 3\nscatter_dt = 0.02\n");
    let out = timeop(&["scatter", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("convergence"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, 1e-12..1e-3f64, Just(0.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_the_file_format(
        k in proptest::option::of(0.5..100.0f64),
        n in proptest::option::of(4usize..1 << 20),
        seed in 0..=i64::MAX as u64,
        a0 in finite(),
        n_list in proptest::collection::vec(2u32..500, 0..6),
        bumps in proptest::collection::vec((finite(), finite()), 0..4),
        tol in finite(),
        levels in 2u32..12,
    ) {
        let cfg = ExperimentConfig {
            grid_k: k,
            grid_n: n,
            seed,
            a0,
            n_list,
            bumps: bumps.into_iter().map(|(a, b)| [a, b]).collect(),
            tol,
            scatter_levels: levels,
            ..Default::default()
        };
        let text = cfg.to_toml_string().unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
