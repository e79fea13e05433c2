//! End-to-end checks of the binary contract: exit codes, file formats,
//! determinism. Each test runs the compiled binary against a config
//! written into the cargo-provided scratch directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rnbeam");

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

struct TestConfig {
    gamma0: f64,
    gamma_k: f64,
    shear: f64,
    n_elems: usize,
    dense_limit: usize,
    initial: &'static str,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            gamma0: 3.0,
            gamma_k: 3.0,
            shear: 0.0,
            n_elems: 8,
            dense_limit: 4000,
            initial: "generic",
        }
    }
}

fn write_config(dir: &Path, tc: &TestConfig) -> PathBuf {
    let out_dir = dir.join("out");
    let body = format!(
        r#"{{
  "beam": {{ "alpha": 1.0, "K": 1.0, "L": 1.0 }},
  "layers": {{
    "odd": [
      {{ "rho": 1.0, "h": 1.0, "E": 1.0 }},
      {{ "rho": 1.0, "h": 1.0, "E": 1.0 }}
    ],
    "even": [ {{ "h": 1.0, "G": {shear} }} ]
  }},
  "gains": {{ "gamma0": {gamma0}, "gamma_odd": [{gamma_k}, {gamma_k}] }},
  "mesh": {{ "n_elems": {n_elems}, "element_order": 2 }},
  "spectral": {{ "n_max": 6, "dense_limit": {dense_limit} }},
  "time": {{ "T": 2.0, "dt": 0.01, "sample_every": 5, "initial": "{initial}" }},
  "analysis": {{ "seed": 0 }},
  "output_dir": "{out}"
}}"#,
        shear = tc.shear,
        gamma0 = tc.gamma0,
        gamma_k = tc.gamma_k,
        n_elems = tc.n_elems,
        dense_limit = tc.dense_limit,
        initial = tc.initial,
        out = out_dir.display(),
    );
    let path = dir.join("run.json");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_admissible_gains() {
    let dir = scratch("validate_ok");
    let cfg = write_config(&dir, &TestConfig::default());
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("admissible: true"));
}

#[test]
fn validate_rejects_critical_gain_and_names_it() {
    let dir = scratch("validate_bad");
    let cfg = write_config(&dir, &TestConfig { gamma0: 1.0, ..TestConfig::default() });
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("admissible: false"));
    assert!(text.contains("gamma0 != sqrt(alpha/K)"), "got: {text}");
}

#[test]
fn config_parse_errors_point_at_the_field() {
    let dir = scratch("parse_path");
    let path = dir.join("run.json");
    fs::write(
        &path,
        r#"{ "beam": { "alpha": true, "K": 1.0, "L": 1.0 } }"#,
    )
    .unwrap();
    let out = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("beam.alpha"), "got: {}", stderr(&out));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = scratch("unknown_field");
    let cfg = write_config(&dir, &TestConfig::default());
    let body = fs::read_to_string(&cfg).unwrap().replace(
        "\"alpha\": 1.0,",
        "\"alpha\": 1.0, \"alhpa\": 1.0,",
    );
    fs::write(&cfg, body).unwrap();
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown field"), "got: {}", stderr(&out));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let out = run(&["validate", "--config", "/no/such/file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_writes_csv_and_summary() {
    let dir = scratch("spectrum_files");
    let cfg = write_config(&dir, &TestConfig::default());
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.join("out/spectrum.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "branch,n,re_lambda,im_lambda,residual,certified"
    );
    let summary = fs::read_to_string(dir.join("out/summary.json")).unwrap();
    assert!(summary.contains("\"abscissa\""));
}

#[test]
fn roots_method_rejects_coupled_stacks() {
    let dir = scratch("roots_coupled");
    let cfg = write_config(&dir, &TestConfig { shear: 1.0, ..TestConfig::default() });
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--method", "roots"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--decoupled"), "got: {}", stderr(&out));

    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--method",
        "roots",
        "--decoupled",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn coupled_flag_rejects_zero_shear_stacks() {
    let dir = scratch("coupled_zero_shear");
    let cfg = write_config(&dir, &TestConfig::default());
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--coupled"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("shear"), "got: {}", stderr(&out));
}

#[test]
fn dense_limit_gate_is_a_numerical_failure() {
    let dir = scratch("dense_limit");
    let cfg = write_config(&dir, &TestConfig { dense_limit: 10, ..TestConfig::default() });
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_writes_trace_and_report() {
    let dir = scratch("simulate_files");
    let cfg = write_config(&dir, &TestConfig::default());
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let trace = fs::read_to_string(dir.join("out/trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "t,energy,dissipation_rate,step_residual");
    let report = fs::read_to_string(dir.join("out/decay_report.json")).unwrap();
    assert!(report.contains("\"mu_fit\""));
    assert!(report.contains("\"rel_mismatch\""));
}

#[test]
fn zero_initial_data_is_flagged_degenerate() {
    let dir = scratch("zero_initial");
    let cfg = write_config(&dir, &TestConfig { initial: "zero", ..TestConfig::default() });
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = fs::read_to_string(dir.join("out/decay_report.json")).unwrap();
    assert!(report.contains("degenerate-fit"), "got: {report}");
}

#[test]
fn zero_gains_are_reported_conservative() {
    let dir = scratch("conservative");
    let cfg = write_config(
        &dir,
        &TestConfig { gamma0: 0.0, gamma_k: 0.0, ..TestConfig::default() },
    );
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = fs::read_to_string(dir.join("out/decay_report.json")).unwrap();
    assert!(report.contains("conservative-case"), "got: {report}");
    assert!(report.contains("\"rel_mismatch\": null"), "got: {report}");
}

#[test]
fn sweep_emits_one_row_per_value_in_order() {
    let dir = scratch("sweep_rows");
    let cfg = write_config(&dir, &TestConfig::default());
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "gains.gamma0",
        "--values",
        "1,3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param_value,abscissa,mu_fit,rel_mismatch,flags");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.0000000000000000e0,NaN,NaN,NaN,inadmissible"));
    assert!(lines[2].starts_with("3.0000000000000000e0,"));
    assert!(!lines[2].contains("NaN"), "admissible row fit failed: {}", lines[2]);
}

#[test]
fn sweep_rejects_unknown_param_paths() {
    let dir = scratch("sweep_unknown");
    let cfg = write_config(&dir, &TestConfig::default());
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "beam.nope",
        "--values",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("beam.nope"));
}

#[test]
fn force_runs_inadmissible_configs() {
    let dir = scratch("force");
    let cfg = write_config(&dir, &TestConfig { gamma0: 1.0, ..TestConfig::default() });
    let gated = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(gated.status.code(), Some(1));
    assert!(stderr(&gated).contains("--force"));
    let forced = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--force"]);
    assert_eq!(forced.status.code(), Some(0), "stderr: {}", stderr(&forced));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, &TestConfig::default());
    let first = dir.join("a");
    let second = dir.join("b");
    for out_dir in [&first, &second] {
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    for name in ["trace.csv", "decay_report.json"] {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
}

#[test]
fn seed_override_changes_the_initial_draw() {
    let dir = scratch("seed_override");
    let cfg = write_config(&dir, &TestConfig::default());
    let mut traces = Vec::new();
    for seed in ["0", "1"] {
        let out_dir = dir.join(seed);
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--output",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        traces.push(fs::read(out_dir.join("trace.csv")).unwrap());
    }
    assert_ne!(traces[0], traces[1]);
}
