//! End-to-end checks of the binary: exit-code contract, report emission,
//! determinism modulo wall time, and the refinement sweep.

use std::path::Path;
use std::process::Command;

fn poslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poslab"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const PP_CONFIG: &str = r#"
[manifold]
profile = "euclidean"
n = 3
r_max = 8.0
nodes = 401

[analysis]
p = 2.0
count = 3
"#;

#[test]
fn pp_smoke_run_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pp.toml", PP_CONFIG);
    let out = dir.path().join("out");
    let status = poslab()
        .args(["run", "pp", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "7"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("pp_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["nodes"], 401);
    assert!(out.join("pp_inputs.csv").exists());
}

#[test]
fn malformed_profile_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "[manifold]\nprofile = \"euclidian\"\nn = 3\nr_max = 8.0\nnodes = 401\n",
    );
    let output = poslab()
        .args(["run", "pp", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("euclidian"), "stderr: {stderr}");
}

#[test]
fn unknown_experiment_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pp.toml", PP_CONFIG);
    let status = poslab()
        .args(["run", "no-such-thing", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_one() {
    // Constants on an infinite-volume model are not in L^p, so the
    // Liouville experiment honestly fails.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "liouville.toml",
        r#"
[manifold]
profile = "euclidean"
n = 3
r_max = 16.0
nodes = 401

[analysis]
k_list = [2.0, 4.0, 8.0]
"#,
    );
    let out = dir.path().join("out");
    let status = poslab()
        .args(["run", "liouville", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("liouville_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "fail");
}

#[test]
fn reports_are_deterministic_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cacc.toml",
        r#"
[manifold]
profile = "euclidean"
n = 3
r_max = 17.0
nodes = 901

[analysis]
count = 4
p_list = [1.5, 2.0]
k_list = [2.0, 4.0]
"#,
    );
    let mut bodies = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}"));
        let status = poslab()
            .args(["run", "caccioppoli", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--seed", "99"])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let mut v: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("caccioppoli_report.json")).unwrap(),
        )
        .unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        bodies.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn refinement_sweep_fits_second_order_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "pw.toml",
        r#"
[manifold]
profile = "hyperbolic"
n = 2
r_max = 2.0
nodes = 401
"#,
    );
    let out = dir.path().join("out");
    let status = poslab()
        .args(["run", "pw-identity", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--refine", "3"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("pw-identity-sweep_report.json")).unwrap(),
    )
    .unwrap();
    let slope = report["stages"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["label"] == "refinement slope")
        .unwrap()["details"]["slope"]
        .as_f64()
        .unwrap();
    assert!(
        (slope - 2.0).abs() <= 0.2,
        "sweep slope {slope} outside 2.0 +- 0.2"
    );

    // A single level is not a sweep.
    let status = poslab()
        .args(["run", "pw-identity", "--config"])
        .arg(&cfg)
        .args(["--refine", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn env_var_overrides_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pp.toml", PP_CONFIG);
    let out_flag = dir.path().join("flag");
    let out_env = dir.path().join("env");
    let status = poslab()
        .args(["run", "pp", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_flag)
        .env("POSLAB_OUT", &out_env)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out_env.join("pp_report.json").exists());
    assert!(!out_flag.exists());
}
