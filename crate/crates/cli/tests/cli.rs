use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use symvqc::circuit::{build_brickwall, Circuit};
use symvqc::gatelib::GateKind;
use tempfile::TempDir;

fn symvqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symvqc"))
        .args(args)
        .env_remove("SYMVQC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn build(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut args = vec!["build", "--out", path_str(&out)];
    args.extend_from_slice(extra);
    let o = symvqc(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn build_reports_counts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bw.json");
    let o = symvqc(&[
        "build",
        "--sites",
        "4",
        "--particles",
        "2",
        "--gate",
        "a",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "gates=6 params=10 cnots=18");

    let out = dir.path().join("sw.json");
    let o = symvqc(&["build", "--variant", "swap24", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "gates=5 params=10 cnots=27");
}

#[test]
fn built_circuit_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = build(&dir, "c.json", &["--sites", "6", "--particles", "3", "--gate", "b"]);
    let parsed = Circuit::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed, build_brickwall(6, 3, GateKind::BGate).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["command"], "build");
    assert_eq!(manifest["summary"]["params"], 38);
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let o = symvqc(&["build", "--sites", "2", "--particles", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let o = symvqc(&["build", "--variant", "swap24", "--sites", "6", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));

    let o = symvqc(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));

    let c = build(&dir, "c.json", &["--sites", "4", "--particles", "2"]);
    let o = symvqc(&[
        "vqe",
        "--circuit",
        path_str(&c),
        "--noise",
        "0,2,0",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = symvqc(&[
        "vqe",
        "--circuit",
        path_str(&c),
        "--estimator",
        "shots:0",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("missing.json");
    let o = symvqc(&["fidelity", "--circuit", path_str(&missing), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(symvqc(&["--help"]).status.code(), Some(0));
}

#[test]
fn fidelity_is_deterministic_and_reaches_circuit_targets() {
    let dir = TempDir::new().unwrap();
    let c = build(&dir, "c.json", &["--sites", "4", "--particles", "2"]);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = symvqc(&[
            "fidelity",
            "--circuit",
            path_str(&c),
            "--targets",
            "1",
            "--target-source",
            "circuit",
            "--seed",
            "3",
            "--max-iters",
            "20000",
            "--out",
            path_str(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (stdout(&o), fs::read_to_string(out).unwrap())
    };
    let (first_stdout, first_csv) = run("f1.csv");
    let (_, second_csv) = run("f2.csv");
    assert_eq!(first_csv, second_csv);
    let mean: f64 = first_stdout
        .trim()
        .strip_prefix("mean_fidelity=")
        .unwrap()
        .parse()
        .unwrap();
    assert!(mean >= 1.0 - 1e-6, "{mean}");
}

fn vqe(dir: &TempDir, circuit: &Path, name: &str, seed: &str, extra: &[&str]) -> (String, String) {
    let out = dir.path().join(name);
    let mut args = vec![
        "vqe",
        "--circuit",
        path_str(circuit),
        "--trials",
        "3",
        "--max-iters",
        "200",
        "--seed",
        seed,
        "--out",
        path_str(&out),
    ];
    args.extend_from_slice(extra);
    let o = symvqc(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (stdout(&o), fs::read_to_string(out).unwrap())
}

#[test]
fn zero_noise_matches_noiseless_output() {
    let dir = TempDir::new().unwrap();
    let c = build(&dir, "c.json", &["--sites", "4", "--particles", "2"]);
    let clean = vqe(&dir, &c, "clean.csv", "5", &[]);
    let zero = vqe(&dir, &c, "zero.csv", "5", &["--noise", "0,0,0", "--trajectories", "4"]);
    assert_eq!(clean, zero);
    assert!(clean.1.starts_with("step,delta_e_mean,delta_e_stderr\n"));
    assert_eq!(clean.1.lines().count(), 201);
}

#[test]
fn shot_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let c = build(&dir, "c.json", &["--sites", "4", "--particles", "2"]);
    let a = vqe(&dir, &c, "a.csv", "5", &["--estimator", "shots:256"]);
    let b = vqe(&dir, &c, "b.csv", "5", &["--estimator", "shots:256"]);
    assert_eq!(a, b);
    let other = vqe(&dir, &c, "c.csv", "6", &["--estimator", "shots:256"]);
    assert_ne!(a.1, other.1);
}

#[test]
fn verify_passes() {
    let o = symvqc(&["verify", "--suite", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for suite in ["gates", "symmetry", "mapping"] {
        assert!(text.contains(&format!("suite {suite}: pass")), "{text}");
    }
    assert_eq!(symvqc(&["verify", "--suite", "nonsense"]).status.code(), Some(1));
}
