use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kp"))
        .args(args)
        .output()
        .expect("kp runs")
}

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec!["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    kp(&args)
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join("out").join(file)).unwrap()
}

const SIMULATE: &str = r#"{
    "mode": "simulate",
    "grid": {"Lx": 25.0, "Ly": 25.0, "Nx": 32, "Ny": 32},
    "solver": {"dt": 0.01, "T": 0.05},
    "initial_data": {"preset": "gaussian", "amplitude": 0.1}
}"#;

const VERIFY: &str = r#"{
    "mode": "verify",
    "grid": {"Lx": 12.566370614359172, "Ly": 12.566370614359172, "Nx": 16, "Ny": 16, "Nt": 16, "Lt": 8.0},
    "verify": {"estimates": ["resonance", "gradient_bound"], "battery_size": 3}
}"#;

const RANDOM: &str = r#"{
    "mode": "norms",
    "grid": {"Lx": 12.566370614359172, "Ly": 12.566370614359172, "Nx": 16, "Ny": 16},
    "initial_data": {"preset": "random_band", "band": 3, "seed": 1}
}"#;

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn simulate_writes_diagnostics_from_time_zero() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), SIMULATE, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let diag = read(d.path(), "diagnostics.csv");
    let mut lines = diag.lines();
    assert_eq!(lines.next(), Some("t,l2,hamiltonian,energy_norm"));
    let first: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(first, 0.0);
    assert!(d.path().join("out/final_field.kpf2").exists());
    let manifest: serde_json::Value = serde_json::from_str(&read(d.path(), "run_manifest.json")).unwrap();
    assert_eq!(manifest["exit_code"], 0);
}

#[test]
fn verify_resonance_is_exact() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), VERIFY, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(d.path(), "estimates.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let resonance: Vec<f64> = rows
        .iter()
        .filter(|r| r[0] == "resonance")
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert!(!resonance.is_empty());
    assert!(resonance.iter().all(|&r| r <= 1e-10));
}

#[test]
fn counterexample_sweep_reports_its_fit() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{
        "mode": "counterexample",
        "counterexample": {"N": [16, 32, 64, 128], "eps": [0.0]}
    }"#;
    let o = run(d.path(), cfg, &[]);
    let fit = read(d.path(), "fit.csv");
    let slope: f64 = fit.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(slope > 0.0, "slope {slope}");
    // The pre-asymptotic slope at these N is steeper than the 1/4 target, so the threshold check fails.
    assert_eq!(code(&o), 4, "slope {slope}");
    assert!(read(d.path(), "sweep.csv").starts_with("N,eps,"));
    assert!(d.path().join("out/counterexample_meta.json").exists());
}

#[test]
fn unknown_key_exits_with_config_error() {
    let d = TempDir::new().unwrap();
    let bad = SIMULATE.replace("\"Ny\": 32", "\"Ny\": 32, \"Nz\": 4");
    let o = run(d.path(), &bad, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.Nz"));
}

#[test]
fn runs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&run(d.path(), VERIFY, &[])), 0);
        assert_eq!(code(&run(d.path(), RANDOM, &[])), 0);
    }
    for f in ["estimates.csv", "norms.csv", "run_manifest.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn seed_override_changes_random_data() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(code(&run(a.path(), RANDOM, &[])), 0);
    assert_eq!(code(&run(b.path(), RANDOM, &["--seed-override", "7"])), 0);
    assert_ne!(read(a.path(), "norms.csv"), read(b.path(), "norms.csv"));
    let m: serde_json::Value = serde_json::from_str(&read(b.path(), "run_manifest.json")).unwrap();
    assert_eq!(m["seed_override"], 7);
}

#[test]
fn plot_handles_reports() {
    let d = TempDir::new().unwrap();
    let empty = d.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = kp(&["plot", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(d.path().join("empty.gp").exists());

    assert_eq!(code(&run(d.path(), SIMULATE, &[])), 0);
    let diag = d.path().join("out/diagnostics.csv");
    let o = kp(&["plot", diag.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let script = fs::read_to_string(d.path().join("out/diagnostics.gp")).unwrap();
    assert!(script.contains("$diag << EOD"));

    let unknown = d.path().join("other.csv");
    fs::write(&unknown, "a,b\n1,2\n").unwrap();
    assert_ne!(code(&kp(&["plot", unknown.to_str().unwrap()])), 0);
}

#[test]
fn zero_threads_is_rejected() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&run(d.path(), SIMULATE, &["--threads", "0"])), 2);
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        let cfg = kp_core::config::RunConfig::from_path(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 5);
}
