//! End-to-end checks of the binary: exit codes, worked examples, and
//! byte-level determinism of every data artifact.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liftpool"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.env_remove("LIFTPOOL_THREADS").output().expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_signal(path: &Path, values: &[f64]) {
    let header: Vec<String> = (0..values.len()).map(|t| format!("t{t}")).collect();
    let row: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    fs::write(
        path,
        format!("channel,{}\n0,{}\n", header.join(","), row.join(",")),
    )
    .expect("write signal");
}

#[test]
fn decompose_haar_worked_example() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("sig.csv");
    write_signal(&input, &[1.0, 2.0, 3.0, 4.0]);
    let out = run(bin().args([
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("dec").to_str().unwrap(),
        "--inverse",
    ]));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let s = fs::read_to_string(dir.path().join("dec/s.csv")).expect("s.csv");
    let d = fs::read_to_string(dir.path().join("dec/d.csv")).expect("d.csv");
    assert_eq!(s, "channel,t0,t1\n0,1.5,3.5\n");
    assert_eq!(d, "channel,t0,t1\n0,-1,-1\n");
    assert!(stdout(&out).contains("reconstruction_max_abs_err=0"));
    let bands = fs::read_to_string(dir.path().join("dec/bands.csv")).expect("bands.csv");
    assert!(bands.starts_with("stream,low,high,total,low_share\n"));
    assert_eq!(bands.lines().count(), 4);
}

#[test]
fn decompose_odd_length_roundtrip() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("sig.csv");
    write_signal(&input, &[0.5, -1.25, 2.0, 7.5, -3.0]);
    let out = run(bin().args([
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("dec").to_str().unwrap(),
        "--inverse",
    ]));
    assert!(out.status.success());
    let rec = fs::read_to_string(dir.path().join("dec/reconstructed.csv")).expect("rec");
    assert_eq!(rec, fs::read_to_string(&input).expect("input back"));
}

#[test]
fn decompose_missing_input_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run(bin().args([
        "decompose",
        "--input",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--out",
        dir.path().join("dec").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn decompose_malformed_input_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("sig.csv");
    fs::write(&input, "channel,t0,t1\n0,1,oops\n").expect("write");
    let out = run(bin().args([
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("dec").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_one() {
    let out = run(bin().args(["train", "--frobnicate"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = run(bin().args(["transmogrify"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bogus_pool_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run(bin().args([
        "train",
        "--pool",
        "bogus",
        "--out",
        dir.path().join("t").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(bin().arg("--help"));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("decompose"));
}

fn tiny_train(dir: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args([
        "train",
        "--epochs",
        "2",
        "--train-size",
        "32",
        "--dev-size",
        "16",
        "--test-size",
        "16",
        "--out",
        dir.to_str().unwrap(),
    ]);
    cmd.args(extra);
    run(&mut cmd)
}

#[test]
fn train_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = tiny_train(&a, &[]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(tiny_train(&b, &[]).status.success());
    let metrics = fs::read_to_string(a.join("metrics.csv")).expect("metrics");
    assert!(metrics.starts_with("epoch,task_loss,c_u,c_p,total,dev_acc\n"));
    assert_eq!(metrics.lines().count(), 3);
    assert_eq!(
        fs::read(a.join("metrics.csv")).unwrap(),
        fs::read(b.join("metrics.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("checkpoint.json")).unwrap(),
        fs::read(b.join("checkpoint.json")).unwrap()
    );
    assert!(stdout(&out).contains("test_acc="));
}

#[test]
fn train_divergence_exits_three() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = tiny_train(&dir.path().join("t"), &["--pool", "max", "--lr", "1e155"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn train_zero_epochs_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = tiny_train(&dir.path().join("t"), &["--epochs", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn trained_checkpoint_feeds_decompose() {
    let dir = tempfile::tempdir().expect("tempdir");
    let train_out = dir.path().join("t");
    assert!(tiny_train(&train_out, &["--pool", "tlp"]).status.success());
    // pool1's filters sit at the backbone width, so the signal needs one
    // row per hidden channel.
    let input = dir.path().join("sig.csv");
    let mut csv = String::from("channel,t0,t1,t2,t3\n");
    for c in 0..8 {
        csv.push_str(&format!("{c},0.{c}1,-0.{c}2,0.{c}3,0.{c}4\n"));
    }
    fs::write(&input, &csv).expect("write");
    let out = run(bin().args([
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("dec").to_str().unwrap(),
        "--checkpoint",
        train_out.join("checkpoint.json").to_str().unwrap(),
        "--prefix",
        "pool1.",
        "--inverse",
    ]));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("dec/s.csv").exists());
}

#[test]
fn compare_two_specs_one_seed_yields_two_rows() {
    let dir = tempfile::tempdir().expect("tempdir");
    let args = [
        "compare",
        "--specs",
        "max,avg",
        "--seeds",
        "0",
        "--epochs",
        "2",
        "--train-size",
        "32",
        "--dev-size",
        "16",
        "--test-size",
        "16",
    ];
    let a = dir.path().join("a");
    let out = run(bin().args(args).args(["--out", a.to_str().unwrap()]));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(a.join("compare.csv")).expect("table");
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "rank,spec,mean_acc,std_acc,seed_accs");
    assert!(lines[1].starts_with("1,"));
    assert!(lines[2].starts_with("2,"));

    // The report must not depend on the worker count.
    let b = dir.path().join("b");
    let threaded = bin()
        .args(args)
        .args(["--out", b.to_str().unwrap()])
        .env("LIFTPOOL_THREADS", "2")
        .output()
        .expect("binary should run");
    assert!(threaded.status.success());
    assert_eq!(fs::read(a.join("compare.csv")).unwrap(), fs::read(b.join("compare.csv")).unwrap());
}

#[test]
fn bench_json_is_deterministic_and_timing_is_separate() {
    let dir = tempfile::tempdir().expect("tempdir");
    let args = ["bench", "--specs", "max,tlp"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(bin().args(args).args(["--out", a.to_str().unwrap()])).status.success());
    assert!(run(bin().args(args).args(["--out", b.to_str().unwrap()])).status.success());
    assert_eq!(fs::read(a.join("bench.json")).unwrap(), fs::read(b.join("bench.json")).unwrap());
    assert!(!a.join("timing.log").exists());

    let timed = dir.path().join("timed");
    assert!(run(bin()
        .args(args)
        .args(["--timing", "--out", timed.to_str().unwrap()]))
    .status
    .success());
    assert!(timed.join("timing.log").exists());
    // Wall-clock numbers stay out of the deterministic artifact.
    assert_eq!(fs::read(a.join("bench.json")).unwrap(), fs::read(timed.join("bench.json")).unwrap());
}

#[test]
fn gradcheck_passes_and_exits_zero() {
    let out = run(bin().args(["gradcheck", "--seeds", "2"]));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("gradient checks passed"));
}

#[test]
fn every_command_logs_resolved_config() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = tiny_train(&dir.path().join("t"), &[]);
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["pool=tlp", "seed=0", "fusion=sum", "kernel=5", "alpha_u=0.001", "lr=0.01"] {
        assert!(err.contains(key), "missing {key} in: {err}");
    }
}
