use std::io::{BufRead, BufReader};
use std::net::TcpStream;
use std::process::{Command, Output, Stdio};

use avgm::harness::{ExperimentResult, Method};
use avgm::runtime::wire::{self, FrameType, PROTOCOL_VERSION};

fn avgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avgm"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn experiment_counting_example() {
    let out = avgm(&[
        "experiment",
        "--model",
        "normal",
        "--d",
        "20",
        "--N",
        "100000",
        "--m",
        "2,4,8",
        "--methods",
        "avgm,oracle",
        "--reps",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let res = ExperimentResult::read_csv(out.stdout.as_slice()).unwrap();
    let count = |m: Method| res.detail_rows().filter(|r| r.method == m).count();
    assert_eq!(count(Method::Avgm), 3 * 5);
    assert_eq!(count(Method::Oracle), 5);
    assert_eq!(res.aggregate_rows().count(), 4);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(avgm(&["experiment", "--m", "0"]).status.code(), Some(2));
    assert_eq!(
        avgm(&["experiment", "--methods", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(avgm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(avgm(&["suggest-r", "--m", "4"]).status.code(), Some(2));
    assert_eq!(avgm(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_one() {
    let out = avgm(&["solve", "--data", "/nonexistent/data.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn suggest_r_prints_the_ratio() {
    let out = avgm(&["suggest-r", "--m", "16", "--n", "1000"]);
    assert_eq!(stdout(&out).trim(), "0.004");
    let out = avgm(&["suggest-r", "--m", "4", "--n", "2"]);
    assert_eq!(stdout(&out).trim(), "0.5");
}

#[test]
fn gen_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.txt");
    let out = avgm(&[
        "--seed",
        "4",
        "gen",
        "--model",
        "normal",
        "--d",
        "6",
        "--N",
        "3000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let truth_line = text
        .lines()
        .find(|l| l.starts_with("# theta_star="))
        .unwrap();
    let truth: Vec<f64> = truth_line["# theta_star=".len()..]
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3000);

    let out = avgm(&["solve", "--data", path.to_str().unwrap(), "--d", "6"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let theta: Vec<f64> = stdout(&out)
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(theta.len(), 6);
    let err: f64 = theta.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum();
    assert!(err < 0.05, "squared error {err}");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        "# small sweep\nmodel=normal\nd=5\nN=1000\nm=2,4\nreps=3\nmethods=avgm\n",
    )
    .unwrap();
    let out = avgm(&[
        "--config",
        cfg.to_str().unwrap(),
        "experiment",
        "--reps",
        "2",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let res = ExperimentResult::read_csv_path(&csv).unwrap();
    assert_eq!(res.detail_rows().count(), 2 * 2);

    std::fs::write(&cfg, "d=5\nnonsense\n").unwrap();
    let out = avgm(&["--config", cfg.to_str().unwrap(), "experiment"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn worker_accepts_hello() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_avgm"))
        .args(["worker", "--listen", "127.0.0.1:0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit(' ').next().unwrap().to_string();
    let mut s = TcpStream::connect(&addr).unwrap();
    wire::write_frame(
        &mut s,
        FrameType::Hello,
        &wire::encode_hello(PROTOCOL_VERSION),
    )
    .unwrap();
    let (ft, payload) = wire::read_frame(&mut s).unwrap().unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(ft, FrameType::Hello);
    assert_eq!(wire::decode_hello(&payload).unwrap(), PROTOCOL_VERSION);
}
