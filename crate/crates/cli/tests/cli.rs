use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &[&str] = &[
    "--set",
    "grid.n_points=4096",
    "--set",
    "grid.half_width=32.0",
    "--set",
    "wigner.n_points=256",
    "--set",
    "wigner.stride=2",
];

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bec-focus"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg("1")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn dry_run_reports_hash_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["evolve", "--dry-run"], &out);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["valid"], true);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(!out.exists());
}

#[test]
fn invalid_values_exit_with_code_1_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["evolve", "--set", "evolution.dt=-1e-4"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["key"], "evolution.dt");
    assert_eq!(e["error"]["exit_code"], 1);

    let o = run(&["ground", "--set", "grid.n_points=100"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_keys_and_missing_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "l = 10\n[grid]\nn_points = 4096\nwidth = 3\n").unwrap();
    let o = run(&["ground", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["ground", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_convergence_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["ground", "--set", "itp.max_iters=3"];
    args.extend_from_slice(SMALL);
    let o = run(&args, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stderr_json(&o)["error"]["kind"], "not_converged");
}

#[test]
fn every_file_carries_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["ground"];
    args.extend_from_slice(SMALL);
    let o = run(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let hash = stdout_json(&o)["config_hash"].as_str().unwrap().to_string();
    let csv = fs::read_to_string(dir.path().join("ground.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), format!("# bec-focus 0.1.0 config_hash={hash}"));
    for name in ["ground.json", "config.json"] {
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
        assert_eq!(v["config_hash"], hash.as_str(), "{name}");
    }
    assert!(dir.path().join("ground.gpef").exists());
}

#[test]
fn evolve_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["evolve", "--set", "interaction.a_s_f=0.58", "--set", "evolution.t_end=0.15"];
    args.extend_from_slice(SMALL);
    let oa = run(&args, a.path());
    let ob = run(&args, b.path());
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    let (va, vb) = (stdout_json(&oa), stdout_json(&ob));
    assert_eq!(va, vb);
    let f = va["summary"]["f"].as_f64().unwrap();
    assert!((f - 1.25).abs() < 0.05, "{f}");
    let trace = |d: &Path| fs::read(d.join("trace.csv")).unwrap();
    assert_eq!(trace(a.path()), trace(b.path()));
}

#[test]
fn potential_dump_lists_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["potential-dump"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("potentials.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    for l in [2, 6, 10, 12] {
        assert!(header.contains(&format!("v{l}_power_law")), "{header}");
    }
}

#[test]
fn documented_example_config_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
output_dir = "out"
l = 10
initial = "ground_state"

[interaction]
regime = "weakly_interacting"
a_s_f = 0.0

[grid]
n_points = 32768
half_width = 64.0

[itp]
dtau = 1e-4
convergence_tol = 1e-10

[evolution]
dt = 1e-4
t_end = 0.4

[sweep]
axes = [
  { name = "l", values = [2, 6, 10, 12] },
  { name = "a_s_f", start = 0.0, stop = 2.0, count = 15, spacing = "linear" },
]
window_doublings = 2              # retries on a doubled window if the boundary monitor trips
"#,
    )
    .unwrap();
    let o = run(&["sweep", "--dry-run", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
