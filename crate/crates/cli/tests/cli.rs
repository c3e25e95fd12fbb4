//! End-to-end runs of the `subsky` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use subsky::SortedIndex;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_subsky"));
    c.env_remove("SUBSKY_SEED");
    c
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

fn index_six(dir: &Path, tie: &str) -> PathBuf {
    let idx = dir.join(format!("six-{tie}.idx"));
    run_ok(
        bin()
            .args(["index", "--tie", tie, "--data"])
            .arg(data("six.csv"))
            .arg("--out")
            .arg(&idx),
    );
    idx
}

#[test]
fn gen_is_seeded_and_handles_empty() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("c.csv"),
    );
    run_ok(
        bin()
            .args([
                "gen",
                "--n",
                "300",
                "--attrs",
                "4x2-8,3:1.5",
                "--seed",
                "11",
                "--out",
            ])
            .arg(&a),
    );
    run_ok(
        bin()
            .args(["gen", "--n", "300", "--attrs", "4x2-8,3:1.5", "--out"])
            .arg(&b)
            .env("SUBSKY_SEED", "11"),
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(a.with_extension("meta.json")).unwrap(),
        fs::read(b.with_extension("meta.json")).unwrap()
    );
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 301);

    run_ok(
        bin()
            .args(["gen", "--n", "0", "--attrs", "2,3", "--out"])
            .arg(&c),
    );
    assert_eq!(fs::read_to_string(&c).unwrap(), "id,A1,A2\n");
}

#[test]
fn gen_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["gen", "--n", "3", "--attrs", "1", "--out"])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["gen", "--n", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn index_orders_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let idx = index_six(dir.path(), "id-asc");
    let loaded = SortedIndex::load(&idx).unwrap();
    let order: Vec<u32> = loaded.list(0).entries().iter().map(|e| e.0 + 1).collect();
    assert_eq!(order, vec![5, 6, 1, 2, 3, 4]);
    let order: Vec<u32> = loaded.list(2).entries().iter().map(|e| e.0 + 1).collect();
    assert_eq!(order, vec![2, 3, 5, 6, 1, 4]);

    let again = dir.path().join("again.idx");
    run_ok(
        bin()
            .args(["index", "--data"])
            .arg(data("six.csv"))
            .arg("--out")
            .arg(&again),
    );
    assert_eq!(fs::read(&idx).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn index_of_corrupt_dataset_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "id,a,b\n0,1,1\n1,0\n").unwrap();
    let out_path = dir.path().join("bad.idx");
    let out = bin()
        .args(["index", "--data"])
        .arg(&bad)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert!(!out_path.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn query_six_tuples_with_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let idx = index_six(dir.path(), "id-asc");
    for algo in [
        "st-s", "st-p", "top-down", "ta-sky", "baseline", "list", "brute",
    ] {
        let out = run_ok(
            bin()
                .args([
                    "query",
                    "--algo",
                    algo,
                    "--attrs",
                    "A1,A2,A3,A4",
                    "--verify",
                    "--data",
                ])
                .arg(data("six.csv"))
                .arg("--index")
                .arg(&idx),
        );
        assert_eq!(
            stdout_lines(&out),
            vec!["t1,0,1,0,1", "t5,1,0,1,1", "t6,1,1,1,0"],
            "{algo}"
        );
    }
}

#[test]
fn query_metrics_json() {
    let dir = tempfile::tempdir().unwrap();
    let idx = index_six(dir.path(), "id-asc");
    let metrics = dir.path().join("m.json");
    run_ok(
        bin()
            .args([
                "query",
                "--algo",
                "top-down",
                "--attrs",
                "A1,A2,A3,A4",
                "--data",
            ])
            .arg(data("six.csv"))
            .arg("--index")
            .arg(&idx)
            .arg("--metrics")
            .arg(&metrics),
    );
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&metrics).unwrap()).unwrap();
    assert_eq!(v["lattice_nodes_queried"], 6);
    assert_eq!(v["skyline_size"], 3);
    assert_eq!(v["partial"], false);
    for key in [
        "algorithm",
        "attributes",
        "tuples",
        "wall_ns",
        "dominance_tests",
        "node_visits",
        "empty_links",
        "sorted_accesses",
        "random_accesses",
        "tuples_accessed",
        "iterations",
        "progressive_log",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn progressive_lines_carry_access_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let idx = index_six(dir.path(), "rest-sum-desc");
    let out = run_ok(
        bin()
            .args([
                "query",
                "--algo",
                "ta-sky",
                "--progressive",
                "--attrs",
                "0,1,2,3",
                "--data",
            ])
            .arg(data("six.csv"))
            .arg("--index")
            .arg(&idx),
    );
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 3);
    let mut labels: Vec<&str> = lines.iter().map(|l| l.split(',').next().unwrap()).collect();
    labels.sort_unstable();
    assert_eq!(labels, vec!["t1", "t5", "t6"]);
    for l in &lines {
        assert_eq!(l.split(',').count(), 1 + 4 + 2, "{l}");
    }
}

#[test]
fn query_usage_errors_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["query", "--algo", "ta-sky", "--data"])
        .arg(data("six.csv"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let unknown = bin()
        .args(["query", "--algo", "st-s", "--attrs", "Nope", "--data"])
        .arg(data("six.csv"))
        .output()
        .unwrap();
    assert_eq!(unknown.status.code(), Some(2));

    let idx = index_six(dir.path(), "id-asc");
    let metrics = dir.path().join("partial.json");
    let capped = bin()
        .args(["query", "--algo", "top-down", "--cap", "2", "--data"])
        .arg(data("six.csv"))
        .arg("--index")
        .arg(&idx)
        .arg("--metrics")
        .arg(&metrics)
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&metrics).unwrap()).unwrap();
    assert_eq!(v["partial"], true);
    assert_eq!(v["lattice_nodes_queried"], 1);
}

#[test]
fn index_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let idx = index_six(dir.path(), "id-asc");
    let out = bin()
        .args(["query", "--algo", "ta-sky", "--data"])
        .arg(data("hosts.csv"))
        .arg("--index")
        .arg(&idx)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hosts_dataset_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("hosts.idx");
    run_ok(
        bin()
            .args(["index", "--data"])
            .arg(data("hosts.csv"))
            .arg("--out")
            .arg(&idx),
    );
    for algo in ["st-s", "st-p", "top-down", "ta-sky", "baseline", "list"] {
        let out = run_ok(
            bin()
                .args(["query", "--verify", "--algo", algo, "--data"])
                .arg(data("hosts.csv"))
                .arg("--index")
                .arg(&idx),
        );
        let labels: Vec<String> = stdout_lines(&out)
            .iter()
            .map(|l| l.split(',').next().unwrap().to_owned())
            .collect();
        assert_eq!(labels, vec!["Host 1", "Host 2"], "{algo}");
    }
}

fn bench_csv(dir: &Path, extra: &[&str]) -> (Option<i32>, String) {
    let data_path = dir.join("z.csv");
    if !data_path.exists() {
        run_ok(
            bin()
                .args([
                    "gen", "--n", "2000", "--attrs", "8x2-6", "--seed", "5", "--out",
                ])
                .arg(&data_path),
        );
    }
    let out = bin()
        .args(["bench", "--data"])
        .arg(&data_path)
        .args(["--seed", "9"])
        .args(extra)
        .output()
        .unwrap();
    (out.status.code(), String::from_utf8(out.stdout).unwrap())
}

/// Drops the two timing columns.
fn counters(csv_text: &str) -> Vec<String> {
    csv_text
        .lines()
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            [&cols[..4], &cols[6..]].concat().join(",")
        })
        .collect()
}

#[test]
fn bench_is_deterministic_and_verified() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--axis",
        "m",
        "--values",
        "2,4,6",
        "--algos",
        "ta-sky,st-s,st-p,baseline",
        "--reps",
        "1",
        "--verify",
    ];
    let (code, first) = bench_csv(dir.path(), &args);
    assert_eq!(code, Some(0));
    let (_, second) = bench_csv(dir.path(), &args);
    assert_eq!(counters(&first), counters(&second));
    let lines: Vec<&str> = first.lines().collect();
    assert!(lines[0].starts_with("axis,value,algorithm,reps,mean_ns,stddev_ns,"));
    assert_eq!(lines.len(), 1 + 3 * 4);
    for l in &lines[1..] {
        assert!(l.contains(",true,"), "{l}");
    }
}

#[test]
fn bench_axes_and_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = bench_csv(
        dir.path(),
        &[
            "--axis", "n", "--values", "100,1000", "--m", "3", "--reps", "2",
        ],
    );
    assert_eq!(code, Some(0));
    assert_eq!(out.lines().count(), 1 + 2 * 2);
    let (code, out) = bench_csv(
        dir.path(),
        &["--axis", "c", "--values", "2,99", "--m", "1", "--reps", "1"],
    );
    assert_eq!(code, Some(0));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    let bad: Vec<&&str> = rows.iter().filter(|r| r.starts_with("c,99,")).collect();
    assert_eq!(bad.len(), 2);
    assert!(bad.iter().all(|r| r.contains("eligible")));
    let (code, _) = bench_csv(dir.path(), &["--axis", "m", "--values", "4,2"]);
    assert_eq!(code, Some(2));
    let (code, _) = bench_csv(dir.path(), &["--axis", "n", "--values", "5000"]);
    assert_eq!(code, Some(2));
}

#[test]
fn cost_table() {
    let out = run_ok(bin().args([
        "cost",
        "--formula",
        "is-dominated",
        "--m",
        "6",
        "--p",
        "0.5",
        "--s-range",
        "0..8",
        "--trials",
        "200",
    ]));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "formula,m,p,n,x,analytical,simulated,stderr,trials"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[4], "0");
    assert_eq!(first[5], "1.0");
    assert_eq!(first[6], "1.0");
    assert_eq!(text.lines().count(), 1 + 5);

    for formula in [
        "prune",
        "list-is-dominated",
        "list-prune",
        "discovered",
        "ta-sky",
        "top-down",
    ] {
        let range = match formula {
            "top-down" => "1..3:1",
            "discovered" | "ta-sky" => "5,10",
            _ => "4",
        };
        run_ok(bin().args([
            "cost",
            "--formula",
            formula,
            "--m",
            "3",
            "--n",
            "10",
            "--s-range",
            range,
            "--trials",
            "20",
        ]));
    }
}

#[test]
fn cost_rejects_bad_probabilities() {
    let out = bin()
        .args(["cost", "--formula", "prune", "--p", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["cost", "--formula", "prune", "--m", "3", "--p", "0.1,0.2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
