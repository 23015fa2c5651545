use std::fs;
use std::path::Path;
use std::process::Command;

use eqw_cli::output::{Cell, OutputTable};

fn eqw(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eqw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> OutputTable {
    OutputTable::read_csv(fs::read(path).unwrap().as_slice()).unwrap()
}

fn reals(table: &OutputTable, column: &str) -> Vec<f64> {
    table
        .column(column)
        .unwrap()
        .into_iter()
        .map(|c| c.as_f64().unwrap())
        .collect()
}

#[test]
fn memoryless_simulation_spreads_ballistically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = eqw(&[
        "simulate", "--q", "0.5", "--coin", "K", "--theta", "45", "--tmax", "100", "--seed", "7",
        "--ntraj", "2", "--out", out,
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let variance = read(&dir.path().join("variance.csv"));
    assert_eq!(variance.meta("seed"), Some("7"));
    assert!(variance.meta("generator").unwrap().starts_with("eqw "));
    let config: serde_json::Value = serde_json::from_str(variance.meta("config").unwrap()).unwrap();
    assert_eq!(config["t_max"], 100);
    assert_eq!(config["q"], 0.5);

    let x2 = reals(&variance, "second_moment");
    assert_eq!(x2.len(), 100);
    assert!((x2[0] - 1.0).abs() < 1e-12);

    let summary = read(&dir.path().join("summary.csv"));
    let alpha = reals(&summary, "alpha")[0];
    assert!((alpha - 2.0).abs() < 0.05, "{alpha}");

    let dist = read(&dir.path().join("distribution.csv"));
    let total: f64 = reals(&dist, "probability").iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
    let rqd: f64 = reals(&dist, "rqd").iter().sum();
    let x = reals(&dist, "x");
    let p = reals(&dist, "probability");
    let mean: f64 = x.iter().zip(&p).map(|(x, p)| x * p).sum();
    assert!((rqd - (x2[99] - mean * mean)).abs() < 1e-6 * x2[99]);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let run = eqw(&[
            "simulate",
            "--q",
            "1.5",
            "--coin",
            "H",
            "--tmax",
            "80",
            "--ntraj",
            "7",
            "--seed",
            "42",
            "--threads",
            threads,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(run.status.success());
    }
    for name in [
        "variance.csv",
        "observables.csv",
        "distribution.csv",
        "summary.csv",
    ] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["simulate", "--q", "0.3", "--coin", "K"],
        vec!["simulate", "--q", "1", "--coin", "Z"],
        vec!["simulate", "--q", "1", "--coin", "K", "--tmax", "1"],
        vec![
            "network",
            "--q",
            "1",
            "--coin",
            "K",
            "--tmax",
            "20",
            "--samples",
            "30",
        ],
        vec!["sweep", "--q", "1", "--coins", ""],
        vec!["frobnicate"],
    ] {
        let run = eqw(&args);
        assert_eq!(run.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(eqw(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_reports_coin_independence_of_the_standard_walk() {
    let dir = tempfile::tempdir().unwrap();
    let run = eqw(&[
        "sweep",
        "--q",
        "0.5,1.5",
        "--coins",
        "H,K",
        "--theta",
        "45",
        "--tmax",
        "150",
        "--ntraj",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let table = read(&dir.path().join("sweep.csv"));
    assert_eq!(table.rows.len(), 4);
    let coins: Vec<_> = table.column("coin").unwrap().into_iter().cloned().collect();
    assert_eq!(
        coins,
        ["H", "K", "H", "K"].map(|c| Cell::Text(c.into())).to_vec()
    );
    let alpha = reals(&table, "alpha");
    let jsd = reals(&table, "jsd");
    assert!((alpha[0] - 2.0).abs() < 0.05 && (alpha[1] - 2.0).abs() < 0.05);
    assert!(jsd[0] < 1e-12 && jsd[0] == jsd[1]);
    assert!(jsd[2] > 0.0);
}

#[test]
fn network_of_the_standard_walk_is_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let run = eqw(&[
        "network",
        "--q",
        "0.5",
        "--coin",
        "H",
        "--tmax",
        "20",
        "--ntraj",
        "2",
        "--samples",
        "10,20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let text = fs::read_to_string(dir.path().join("edges_traj1.txt")).unwrap();
    let edges: Vec<[i64; 3]> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let v: Vec<i64> = l.split(' ').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(edges.len(), 40);
    assert!(edges
        .iter()
        .all(|e| (e[0] - e[1]).abs() == 1 && (1..=20).contains(&e[2])));

    let series = read(&dir.path().join("network.csv"));
    assert_eq!(series.rows.len(), 4);
    assert_eq!(reals(&series, "n_vertices"), [21.0, 41.0, 21.0, 41.0]);
    let degrees = read(&dir.path().join("degree_distribution.csv"));
    assert_eq!(reals(&degrees, "k"), [1.0, 2.0]);
    assert_eq!(reals(&degrees, "p_mean"), [2.0 / 41.0, 39.0 / 41.0]);
}

#[test]
fn json_mirror_matches_csv() {
    let csv = tempfile::tempdir().unwrap();
    let json = tempfile::tempdir().unwrap();
    for (dir, format) in [(&csv, "csv"), (&json, "json")] {
        let run = eqw(&[
            "simulate",
            "--q",
            "2",
            "--coin",
            "K",
            "--tmax",
            "40",
            "--ntraj",
            "3",
            "--format",
            format,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(run.status.success());
    }
    let table = read(&csv.path().join("observables.csv"));
    let doc: serde_json::Value =
        serde_json::from_slice(&fs::read(json.path().join("observables.json")).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["seed"], "0");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), table.rows.len());
    for (j, c) in rows.iter().zip(&table.rows) {
        for (a, b) in j.as_array().unwrap().iter().zip(c) {
            assert_eq!(a.as_f64().unwrap().to_bits(), b.as_f64().unwrap().to_bits());
        }
    }
}
