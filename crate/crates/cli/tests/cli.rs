use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fdbouss(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdbouss"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = "model = boussinesq-1d\ngrid.n = 128\ninitial.family = gaussian\ninitial.amplitude = 0.1\n\
integrator.dt = 0.001\nintegrator.t_end = 0.05\ndiagnostics.output_stride = 10\noutput.dir = out\n";

#[test]
fn simulate_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let o = fdbouss(&["simulate", "run.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    assert!(out.join("metadata.json").is_file());
    assert!(out.join("series.csv").is_file());
    assert_eq!(fs::read_dir(out.join("snapshots")).unwrap().count(), 6);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["status"], "completed");
    assert!(meta["existence"]["t0"].as_f64().unwrap() > 0.0);
}

#[test]
fn set_overrides_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    for out in ["a", "b"] {
        let o = fdbouss(
            &["simulate", "run.cfg", "--set", "physics.beta=0.5", "--output", out],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(fs::read(a.join("series.csv")).unwrap(), fs::read(b.join("series.csv")).unwrap());
    let snap = "snapshots/step_00000050.bin";
    assert_eq!(fs::read(a.join(snap)).unwrap(), fs::read(b.join(snap)).unwrap());
    let meta = fs::read_to_string(a.join("metadata.json")).unwrap();
    assert!(meta.contains("physics.beta = 0.5"));
}

#[test]
fn invalid_config_lists_every_violation_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "grid.n = 100\nphysics.beta = -1\nintegrator.dt = 0\n").unwrap();
    let o = fdbouss(&["simulate", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["grid.n", "physics.beta", "integrator.dt"] {
        assert!(err.contains(key), "{key} missing from: {err}");
    }
}

#[test]
fn failing_monitor_gives_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // coarse grid without dealiasing: the Hamiltonian drifts beyond tolerance
    let cfg = "grid.n = 16\ninitial.amplitude = 0.5\ninitial.width = 0.3\nintegrator.dealias = none\n\
               integrator.dt = 0.01\nintegrator.t_end = 0.5\noutput.dir = out\n";
    fs::write(dir.path().join("run.cfg"), cfg).unwrap();
    let o = fdbouss(&["simulate", "run.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("Fail"));
}

#[test]
fn sweep_over_beta_writes_ordered_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let o = fdbouss(
        &["sweep", "run.cfg", "--vary", "physics.beta=0.25,0.5,1", "--parallel", "3", "--output", "sw"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sw/summary.csv")).unwrap();
    let betas: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(betas, ["0.25", "0.5", "1.0"]);
    assert!(dir.path().join("sw/run_002/series.csv").is_file());
}

#[test]
fn emit_plot_tables_and_unknown_kind() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    assert_eq!(fdbouss(&["simulate", "run.cfg"], dir.path()).status.code(), Some(0));
    let o = fdbouss(&["emit-plot", "out", "series"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 6);
    let o = fdbouss(&["emit-plot", "out", "snapshot", "--snapshot", "0", "-o", "p.dat"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("p.dat")).unwrap().lines().count(), 128);
    let o = fdbouss(&["emit-plot", "out", "contour"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown kind"));
}

#[test]
fn existence_time_from_norms_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = fdbouss(
        &["existence-time", "--eta-norm", "0", "--u-norm", "0", "--h0", "0.5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // T1 = ln 2 for zero data, T2 infinite
    assert!((v["t1"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(v["t2"].is_null());
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let o = fdbouss(&["existence-time", "run.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["t0"].as_f64().unwrap() > 0.0);
}

#[test]
fn difference_of_identical_data_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    let o = fdbouss(&["difference", "run.cfg", "run.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["e0"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_inequalities_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = fdbouss(&["verify-inequalities", "--trials", "5", "--n", "64,128"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["estimates"].as_array().unwrap().len(), 5);
    assert_eq!(v["multipliers"]["violations"], 0);
}

#[test]
fn convergence_reports_fourth_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "grid.n = 64\ninitial.amplitude = 0.2\ninitial.width = 0.785\ninitial.velocity = 1\n\
               integrator.dt = 0.04\nintegrator.t_end = 1\n";
    fs::write(dir.path().join("c.cfg"), cfg).unwrap();
    let o = fdbouss(&["convergence", "c.cfg", "--ns", "32,64", "--n-ref", "128"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let last = v["temporal"]["orders"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!((last - 4.0).abs() < 0.2, "{last}");
}
