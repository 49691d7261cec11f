use std::path::Path;
use std::process::{Command, Output};

use qpower::qpsv::{read_state, save_state};
use qpower_core::statevector::{random_state, translate};

fn qpower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpower")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn coeffs_table() {
    let o = qpower(&["coeffs", "--m", "2", "--p", "5", "--ngamma", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# depth: 11\n"));
    assert!(text.contains("# sum: 2\n"));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "i,s,T,part");
    assert_eq!(rows.len(), 12);
    assert!(rows[1].starts_with("1,0.2072453858971878"));
    assert!(rows[6].starts_with("6,-0.657963087177502"));
}

#[test]
fn exit_codes() {
    assert_eq!(qpower(&["--help"]).status.code(), Some(0));
    assert_eq!(qpower(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qpower(&["coeffs", "--p", "4"]).status.code(), Some(1));
    assert_eq!(qpower(&["groundstate", "--model", "custom"]).status.code(), Some(1));
    assert_eq!(
        qpower(&["translate", "--input", "/nonexistent.qpsv", "--shift", "1", "--output", "/tmp/x"]).status.code(),
        Some(1)
    );
    // a zero tolerance can never be met
    let o = qpower(&["groundstate", "--n", "4", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical breakdown"));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["distance", "--n", "6", "--power", "1,2", "--dtau-list", "0.1,0.05", "--samples", "8", "--seed", "7"];
    let a = qpower(&args);
    let b = qpower(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("# seed: 7\n"));
    let c = qpower(&["distance", "--n", "6", "--power", "1,2", "--dtau-list", "0.1,0.05", "--samples", "8", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn groundstate_small_ring() {
    let text = stdout(&qpower(&["groundstate", "--n", "4"]));
    let rows = data_lines(&text);
    let header: Vec<&str> = rows[0].split(',').collect();
    let row: Vec<&str> = rows[1].split(',').collect();
    let e0: f64 = row[header.iter().position(|c| *c == "E0").unwrap()].parse().unwrap();
    // each bond is 1/4 + S_i.S_j; the four-site ring has sum S.S = -2
    assert!((e0 + 1.0).abs() < 1e-9, "{}", e0);
}

#[test]
fn translate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.qpsv");
    let moved = dir.path().join("moved.qpsv");
    let back = dir.path().join("back.qpsv");
    let s = random_state(6, 3).unwrap();
    save_state(&input, &s).unwrap();
    let run = |i: &Path, shift: &str, o: &Path| {
        let out = qpower(&["translate", "--input", i.to_str().unwrap(), "--shift", shift, "--output", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&input, "2", &moved);
    run(&moved, "-2", &back);
    let read = |p: &Path| read_state(std::fs::File::open(p).unwrap()).unwrap();
    assert_eq!(read(&moved).amplitudes(), translate(&s, 2).amplitudes());
    assert_eq!(read(&back).amplitudes(), s.amplitudes());
}

#[test]
fn json_output() {
    let o = qpower(&["--format", "json", "coeffs", "--m", "1", "--p", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["meta"]["command"], "coeffs");
    assert_eq!(v["columns"].as_array().unwrap().len(), 4);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["s"], 1.0);
}

#[test]
fn krylov_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = qpower(&["krylov", "--n", "8", "--refs", "phiA,phiB", "--nmax", "3", "--r", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 4);
    let energies: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}
