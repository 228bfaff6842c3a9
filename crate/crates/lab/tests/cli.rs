//! End-to-end checks of the `multiphase` binary: exit codes, report files,
//! determinism, and the instance file round trip.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multiphase"))
}

fn tmp(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("multiphase-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn usage_error_is_exit_2() {
    let out = bin().arg("bogus-subcommand").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["bench-multiphase", "--k", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing --n");
}

#[test]
fn bench_runs_and_is_deterministic() {
    let dir = tmp("bench");
    let run = |out_dir: &PathBuf| {
        let out = bin()
            .args([
                "bench-multiphase",
                "--n",
                "4096",
                "--k",
                "16",
                "--queries",
                "320",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    };
    let a = dir.join("a");
    let b = dir.join("b");
    run(&a);
    run(&b);
    let csv_a = std::fs::read_to_string(a.join("bench.csv")).unwrap();
    let csv_b = std::fs::read_to_string(b.join("bench.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "reruns must be byte-identical");
    assert_eq!(csv_a.lines().count(), 4, "header + 3 scheme rows");
    assert!(csv_a.starts_with("scheme,n,k,w,mean_t1,mean_t2,p99_tq,phase2_writes"));
    let _ = std::fs::remove_dir_all(&dir);
}

/// The sqrt scheme's mean query time grows at most 2.5x when n grows 4x.
#[test]
fn bench_sqrt_scaling() {
    let dir = tmp("scaling");
    let mean_tq = |n: &str, out: &PathBuf| -> f64 {
        let output = bin()
            .args(["bench-multiphase", "--n", n, "--k", "16", "--queries", "480", "--seed", "3", "--out"])
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0));
        let csv = std::fs::read_to_string(out.join("bench.csv")).unwrap();
        let row = csv.lines().find(|l| l.starts_with("sqrt-advice")).unwrap();
        let cols: Vec<&str> = row.split(',').collect();
        let t1: f64 = cols[4].parse().unwrap();
        let t2: f64 = cols[5].parse().unwrap();
        t1 + t2
    };
    let small = mean_tq("1024", &dir.join("n10"));
    let large = mean_tq("4096", &dir.join("n12"));
    assert!(large <= 2.5 * small, "mean t_q grew {small} -> {large}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_info_exit_codes() {
    let dir = tmp("vinfo");
    let out = bin()
        .args(["verify-info", "--tables", "40", "--seed", "5", "--out"])
        .arg(dir.join("ok"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let out = bin()
        .args(["verify-info", "--tables", "5", "--seed", "5", "--plant-defect", "--out"])
        .arg(dir.join("planted"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("chain-rule"), "violation must name the fact: {text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cutpaste_report() {
    let dir = tmp("cutpaste");
    let out = bin()
        .args([
            "cutpaste",
            "--gamma",
            "0.001",
            "--z-size",
            "4",
            "--eps",
            "0.01",
            "--restarts",
            "6",
            "--resolution",
            "1000",
            "--seed",
            "2",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 violations"), "{text}");
    assert!(dir.join("cutpaste.csv").exists());
    assert!(dir.join("best-kernel.txt").exists(), "feasible kernel at gamma=1e-3");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn translate_circuit_end_to_end_and_parse_error() {
    let dir = tmp("translate");
    let circuit = dir.join("example.circuit");
    multiphase_lab::commands::write_example_circuit(&circuit).unwrap();
    let out = bin()
        .args(["translate-circuit", "--circuit"])
        .arg(&circuit)
        .args(["--r", "8", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.join("translate-report.txt")).unwrap();
    assert!(report.contains("probe_bound_ok = true"));
    assert!(report.contains("equivalence = PASS"));

    let bad = dir.join("bad.circuit");
    std::fs::write(&bad, "circuit v1\ninputs 4\ngate 0 level 1 or i9\noutputs g0\n").unwrap();
    let out = bin()
        .args(["translate-circuit", "--circuit"])
        .arg(&bad)
        .args(["--r", "2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "parse errors exit 2");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sample_instance_round_trips() {
    let dir = tmp("sample");
    let file = dir.join("inst.txt");
    let out = bin()
        .args(["sample-instance", "--n", "64", "--k", "4", "--seed", "11", "--out"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&file).unwrap();
    let inst = multiphase_lab::formats::instance_from_string(&text).unwrap();
    assert_eq!(inst.n(), 64);
    assert_eq!(inst.k(), 4);
    assert!(inst.is_hard_tagged());
    assert_eq!(multiphase_lab::formats::instance_to_string(&inst), text);
    let _ = std::fs::remove_dir_all(&dir);
}
