use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ramanujan-abel");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn csum_prints_values() {
    for (q, n, want) in [
        ("4", "2", "-2"),
        ("1", "7", "1"),
        ("5", "0", "4"),
        ("6", "-3", "-2"),
    ] {
        let out = run(&["csum", "--q", q, "--n", n]);
        assert!(out.status.success());
        let csv = stdout(&out);
        assert_eq!(csv.lines().nth(1).unwrap(), format!("{q},{n},{want}"));
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["sieve", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["autocorr", "--gap", "2"]).status.code(), Some(2));
    assert_eq!(run(&["pair"]).status.code(), Some(2));
    // rejected by the library rather than by clap
    let odd = run(&["singular", "--form", "pair", "--params", "3"]);
    assert_eq!(odd.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&odd.stderr).contains("error"));
    let d = run(&["conjd", "--a", "2", "--b", "4", "--l", "1", "--n", "100"]);
    assert_eq!(d.status.code(), Some(2));
    let inadmissible = run(&["tuple", "--offsets", "0,2,4", "--n", "100"]);
    assert_eq!(inadmissible.status.code(), Some(2));
}

#[test]
fn sieve_summary_and_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.bin");
    let file = file.to_str().unwrap();
    let first = run(&["sieve", "--n", "5000", "--cache", file]);
    assert!(first.status.success());
    assert!(std::path::Path::new(file).exists());
    let second = run(&["sieve", "--n", "5000", "--cache", file]);
    assert_eq!(stdout(&first), stdout(&second));
    let summary = String::from_utf8_lossy(&second.stderr);
    assert!(summary
        .lines()
        .next()
        .unwrap()
        .starts_with("N=5000 checksum="));

    // a cached file for another bound is rebuilt, not trusted
    let other = run(&["sieve", "--n", "4000", "--cache", file]);
    assert!(stdout(&other).contains("\n4000,"));
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .env("RAMANUJAN_ABEL_CACHE", dir.path())
        .args(["pnt", "--n", "1000"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("sieve-v1-1000.bin").exists());
}

#[test]
fn unwritable_cache_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("t.bin");
    let out = run(&["sieve", "--n", "100", "--cache", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file"));
}

#[test]
fn out_stem_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("run");
    let out = run(&[
        "--out",
        stem.to_str().unwrap(),
        "autocorr",
        "--gap",
        "2",
        "--n",
        "10",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
    assert!(csv.starts_with("label,N,mean,predicted,abs_gap,rel_gap\n"));
    assert_eq!(csv.lines().count(), 11);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
            .unwrap();
    let m = &doc["manifest"];
    assert_eq!(m["sieve_bound"], 12);
    assert_eq!(m["parameters"]["subcommand"], "autocorr");
    assert_eq!(m["parameters"]["gap"], 2);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["output_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(doc["result"]["N"], 10);
}

#[test]
fn autocorr_small_n_is_hand_checkable() {
    // Λ₁(p^k) = (1 − 1/p)·ln p; n ∈ {2, 3, 5, 7, 9} have n and n+2 prime powers.
    let l1 = |p: f64| (1.0 - 1.0 / p) * p.ln();
    let pairs = [(2.0, 2.0), (3.0, 5.0), (5.0, 7.0), (7.0, 3.0), (3.0, 11.0)];
    let want = pairs.iter().map(|&(a, b)| l1(a) * l1(b)).sum::<f64>() / 10.0;
    let out = run(&["autocorr", "--gap", "2", "--n", "10"]);
    let last = stdout(&out).lines().last().unwrap().to_string();
    let mean: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((mean - want).abs() < 1e-11);
}

#[test]
fn props_reports_all_checks() {
    let out = run(&["props", "--qmax", "10", "--nmax", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.starts_with("id,statement,cases,failures,passed,witness\n"));
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn singular_series_reports_both_conventions() {
    let out = run(&[
        "singular", "--form", "series", "--params", "2", "--p", "10000",
    ]);
    let csv = stdout(&out);
    let forms: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(forms, ["series(2)", "series_wk(2)", "pair(2)"]);
}
