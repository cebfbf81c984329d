use qcm::cli::{run_from, MuSpec};
use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["qcm"];
    v.extend_from_slice(args);
    run_from(v).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn qft_verify_passes() {
    assert_eq!(run(&["qft-verify", "--qubits", "6"]), 0);
    assert_eq!(run(&["qft-verify", "--qubits", "1"]), 0);
}

#[test]
fn poisson1d_writes_solution_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["poisson1d", "--cells", "64", "--out", out]), 0);
    let csv = read(dir.path(), "poisson1d_solution_N64.csv");
    assert_eq!(csv.lines().next().unwrap(), "k,x,f,v_quantum,v_oracle,v_analytic");
    assert_eq!(csv.lines().count(), 65);
    let diag: serde_json::Value = serde_json::from_str(&read(dir.path(), "poisson1d_diagnostics_N64.json")).unwrap();
    assert_eq!(diag["schema"], "qcm-results/1/poisson1d-diagnostics");
    for key in ["N", "gate_counts", "junk_norm", "fit_max_error", "l2_error"] {
        assert!(!diag[key].is_null(), "{key}");
    }
}

#[test]
fn poisson2d_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        assert_eq!(run(&["poisson2d", "--cells", "8", "--modes", "3", "--seed", "5", "--no-sweep", "--out", out]), 0);
    }
    for f in ["poisson2d_solution_N8.csv", "poisson2d_diagnostics_N8.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn rve_fixture_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&["rve", "--cells", "8", "--iters", "4", "--mu-spec", "two-phase:1,2,0.5", "--mu0", "1.5", "--no-sweep", "--out", out]);
    assert_eq!(code, 0);
    let csv = read(dir.path(), "rve_strain_N8_S4.csv");
    assert_eq!(
        csv.lines().next().unwrap(),
        "k,x,mu,gamma_0,gamma_1,gamma_2,gamma_3,gamma_4,gamma_oracle,sigma"
    );
    let s: serde_json::Value = serde_json::from_str(&read(dir.path(), "rve_summary_N8_S4.json")).unwrap();
    assert!((s["mu_eff"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-4);
    assert!(s["oracle_max_deviation"].as_f64().unwrap() < 1e-6);
    assert!(s["decay_rate"].as_f64().unwrap() < 0.0);
}

#[test]
fn homogeneous_rve_gives_constant_strain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["rve", "--iters", "1", "--mu-spec", "values:2,2,2,2,2,2,2,2", "--no-sweep", "--out", out]), 0);
    let csv = read(dir.path(), "rve_strain_N8_S1.csv");
    for line in csv.lines().skip(1) {
        let g: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((g - 0.01).abs() < 1e-12);
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["gatecount", "--experiment", "poisson1d", "--sizes", "--out", out]), 0);
    assert_eq!(read(dir.path(), "poisson1d_gatecount.csv"), "N,u3,cnot,depth\n");
}

#[test]
fn gatecount_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["gatecount", "--experiment", "poisson1d", "--sweep", "--out", out]), 0);
    let csv = read(dir.path(), "poisson1d_gatecount.csv");
    let totals: Vec<usize> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).take(2).map(|v| v.parse::<usize>().unwrap()).sum())
        .collect();
    assert_eq!(totals.len(), 6);
    assert!(totals.windows(2).all(|w| w[1] > w[0]));
    let s: serde_json::Value = serde_json::from_str(&read(dir.path(), "poisson1d_gatecount_summary.json")).unwrap();
    assert_eq!(s["schema"], "qcm-results/1/gatecount-summary");
    assert!(s["scaling"]["polylog_r2"].as_f64().unwrap() >= 0.99);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("res");
    std::fs::write(&cfg, format!("cells = 16\nout = \"{}\"\n", out.display())).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "poisson1d"]), 0);
    assert!(out.join("poisson1d_solution_N16.csv").exists());
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "poisson1d", "--cells", "8"]), 0);
    assert!(out.join("poisson1d_solution_N8.csv").exists());
}

#[test]
fn invalid_configuration_is_rejected_before_running() {
    let v = |a: &[&str]| {
        let mut args = vec!["qcm"];
        args.extend_from_slice(a);
        run_from(args)
    };
    assert!(v(&["poisson1d", "--cells", "12"]).is_err());
    assert!(v(&["rve", "--iters", "0"]).is_err());
    assert!(v(&["rve", "--mu-spec", "values:1,2"]).is_err());
    assert!(v(&["qft-verify", "--qubits", "0"]).is_err());
    assert!(MuSpec::parse("stripes:1,2").is_err());
    assert_eq!(
        MuSpec::parse("two-phase:1,2,0.25").unwrap().field(8).unwrap(),
        vec![1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]
    );
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_qcm");
    let ok = Command::new(bin).args(["qft-verify", "--qubits", "3"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("# F|110>"));
    let bad = Command::new(bin).args(["poisson1d", "--cells", "7"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
