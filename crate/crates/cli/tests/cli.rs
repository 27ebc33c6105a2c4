//! End-to-end tests of the `wavetrap` binary: exit codes, artifact shapes,
//! strict config validation, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wavetrap")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// A single thin barrier across a Neumann strip: certifies in milliseconds
/// and traps a deep discrete mode, so the whole pipeline stays fast.
const SLIT: &str = r#"{
  "variant": "centered_obstacles",
  "wall_bc": "neumann",
  "n": 1,
  "a": 1.0,
  "profile": {"kind": "zero"},
  "budget": 600,
  "grid": {"hx": 0.125, "hy": 0.125, "l": 6.0},
  "k": 2
}"#;

#[test]
fn certify_writes_valid_certificates_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("certified"));

    let text = fs::read_to_string(out_dir.join("certificates.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "certify");
    assert_eq!(v["all_valid"], true);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 1);
    assert_eq!(certs[0]["m"], 1);
    assert!(certs[0]["q_star"].as_f64().unwrap() < certs[0]["threshold"].as_f64().unwrap());
    // The echoed config block records every resolved default.
    for key in ["budget", "grid", "k", "unobstructed"] {
        assert!(!v["config"][key].is_null(), "config echo lacks {key}");
    }

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("variant,wall_bc,N,a,profile,m,threshold,q_star,margin"));
    assert!(lines[1].starts_with("centered_obstacles,neumann,1,1,zero,1,"));
}

#[test]
fn full_pipeline_confirms_the_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out_dir = dir.path().join("out");
    let c = cfg.to_str().unwrap();
    let o = out_dir.to_str().unwrap();

    assert_eq!(code(&run(&["certify", "--config", c, "--out", o])), 0);

    let solve = run(&["solve", "--config", c, "--out", o]);
    assert_eq!(code(&solve), 0, "stderr: {}", stderr(&solve));
    let modes = fs::read_to_string(out_dir.join("modes.csv")).unwrap();
    let rows: Vec<&str> = modes.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "modes.csv: {modes}");
    let fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(fields[3], "1"); // class index
    let mu: f64 = fields[4].parse().unwrap();
    let thr: f64 = fields[5].parse().unwrap();
    let q_star: f64 = fields[6].parse().unwrap();
    assert!(mu < thr && mu < q_star, "mu {mu} vs thr {thr}, q* {q_star}");
    assert!(out_dir.join("mode_m1_r0.csv").exists());
    assert!(out_dir.join("solve.json").exists());

    let verify = run(&["verify", "--config", c, "--out", o]);
    assert_eq!(code(&verify), 0, "stderr: {}", stderr(&verify));
    let residuals = fs::read_to_string(out_dir.join("residuals.csv")).unwrap();
    assert!(residuals.starts_with("check,case,residual\n"));
    for line in residuals.lines().skip(1) {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r < 1e-9, "residual line {line}");
    }
    assert!(stdout(&verify).contains("identity_row_sum,m=1,0"));

    let report = run(&["report", "--config", c, "--out", o]);
    assert_eq!(code(&report), 0, "stderr: {}", stderr(&report));
    let md = fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert!(md.contains("| 1 |"), "report table row missing:\n{md}");
    assert!(md.contains("certified"));
    for f in ["q_lambda_m1.csv", "q_alpha_m1.csv", "phi_m1.csv"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let lam = fs::read_to_string(out_dir.join("q_lambda_m1.csv")).unwrap();
    assert!(lam.starts_with("lambda,quotient,threshold\n"));
    assert_eq!(lam.lines().count(), 34);
}

#[test]
fn schema_violations_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();

    // Profile amplitude outside [0, 1).
    let bad_amp = write_config(
        dir.path(),
        "amp.json",
        r#"{"variant":"centered_obstacles","wall_bc":"neumann","n":2,"a":1.0,
            "profile":{"kind":"parabolic","amplitude":1.2}}"#,
    );
    let out = run(&["certify", "--config", bad_amp.to_str().unwrap(), "--out", o]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("amplitude"));

    // Unknown top-level key.
    let bad_key = write_config(
        dir.path(),
        "key.json",
        r#"{"variant":"centered_obstacles","wall_bc":"neumann","n":2,"a":1.0,
            "profile":{"kind":"zero"},"mystery":1}"#,
    );
    let out = run(&["certify", "--config", bad_key.to_str().unwrap(), "--out", o]);
    assert_eq!(code(&out), 1);

    // Missing config file.
    let out = run(&["certify", "--config", "/nonexistent.json", "--out", o]);
    assert_eq!(code(&out), 1);

    // Unknown flag: usage error, not a computational failure.
    let cfg = write_config(dir.path(), "ok.json", SLIT);
    let out = run(&["certify", "--config", cfg.to_str().unwrap(), "--frobnicate"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn misaligned_grid_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--grid",
        "0.3,0.125,6",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("misaligned"));
}

#[test]
fn no_admissible_classes_is_a_clean_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d1.json",
        r#"{"variant":"centered_obstacles","wall_bc":"dirichlet","n":1,"a":1.0,
            "profile":{"kind":"zero"}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("no admissible symmetry classes"));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("certificates.json")).unwrap())
            .unwrap();
    assert_eq!(v["certificates"].as_array().unwrap().len(), 0);
    assert!(v["notice"].as_str().unwrap().contains("nothing to certify"));
}

#[test]
fn unobstructed_reference_retains_no_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unob.json",
        r#"{"variant":"centered_obstacles","wall_bc":"neumann","n":2,"a":1.0,
            "profile":{"kind":"zero"},
            "grid":{"hx":0.125,"hy":0.125,"l":4.0},"k":4,"unobstructed":true}"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let modes = fs::read_to_string(out_dir.join("modes.csv")).unwrap();
    assert_eq!(modes.lines().count(), 1, "expected header only: {modes}");
}

#[test]
fn coarse_verify_keeps_exit_zero_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--coarse"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("check,case,residual\n"));
    assert!(stderr(&out).contains("coarse quadrature"));
}

#[test]
fn report_without_certificates_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out_dir = dir.path().join("empty");
    fs::create_dir_all(&out_dir).unwrap();
    let out = run(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("certificates.json"));
}

#[test]
fn report_without_modes_warns_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out_dir = dir.path().join("out");
    let c = cfg.to_str().unwrap();
    let o = out_dir.to_str().unwrap();
    assert_eq!(code(&run(&["certify", "--config", c, "--out", o])), 0);
    let out = run(&["report", "--config", c, "--out", o]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("modes.csv not found"));
    let md = fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert!(md.contains("covers certificates only"));
    assert!(md.contains("| 1 |"));
}

#[test]
fn identical_runs_produce_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let c = cfg.to_str().unwrap();
    let mut bytes: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for sub in ["one", "two"] {
        let out_dir = dir.path().join(sub);
        let o = out_dir.to_str().unwrap();
        assert_eq!(code(&run(&["certify", "--config", c, "--out", o])), 0);
        assert_eq!(code(&run(&["solve", "--config", c, "--out", o])), 0);
        assert_eq!(code(&run(&["verify", "--config", c, "--out", o])), 0);
        assert_eq!(code(&run(&["report", "--config", c, "--out", o])), 0);
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        bytes.push(files);
    }
    let names: Vec<&String> = bytes[0].iter().map(|(n, _)| n).collect();
    assert!(names.contains(&&"report.md".to_string()));
    assert_eq!(bytes[0].len(), bytes[1].len());
    for (a, b) in bytes[0].iter().zip(&bytes[1]) {
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1, "artifact {} differs between runs", a.0);
    }
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let first = dir.path().join("first");
    assert_eq!(
        code(&run(&[
            "certify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            first.to_str().unwrap(),
        ])),
        0
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("certificates.json")).unwrap())
            .unwrap();
    let echoed = write_config(
        dir.path(),
        "echo.json",
        &serde_json::to_string(&v["config"]).unwrap(),
    );
    let second = dir.path().join("second");
    assert_eq!(
        code(&run(&[
            "certify",
            "--config",
            echoed.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ])),
        0
    );
    assert_eq!(
        fs::read(first.join("certificates.json")).unwrap(),
        fs::read(second.join("certificates.json")).unwrap(),
        "re-running from the echoed config must reproduce the artifact"
    );
}

#[test]
fn study_flag_writes_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SLIT);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--study",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let table = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(table.starts_with("kind,m,rank,hx,hy,l,mu,"));
    assert!(table.contains("\nrichardson,"));
    assert!(table.contains("\nl_sensitivity,"));
}
