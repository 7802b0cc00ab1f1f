use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn epidelay(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epidelay"))
        .args(args)
        .env("EPIDELAY_OUT_DIR", out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn cfg(label: &str) -> String {
    scenarios().join(format!("{label}.cfg")).display().to_string()
}

#[test]
fn run_writes_totals() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(&["run", "--config", &cfg("ode_table1_sigma5")], out.path());
    assert!(o.status.success(), "{o:?}");
    let totals = std::fs::read_to_string(out.path().join("ode_table1_sigma5/totals.csv")).unwrap();
    assert_eq!(totals.lines().count(), 1070);
    assert_eq!(totals.lines().next(), Some("t,S,I,R,D,N"));
    assert!(out.path().join("ode_table1_sigma5/summary.txt").exists());
}

#[test]
fn out_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = epidelay(
        &["run", "--config", &cfg("seird_table1"), "--out", &flag_dir.path().display().to_string()],
        env_dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    assert!(flag_dir.path().join("seird_table1/totals.csv").exists());
    assert!(!env_dir.path().join("seird_table1").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(&["run", "--config", "/nonexistent/x.cfg"], out.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_grid_reports_field() {
    let out = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(cfg("ode_table1_sigma5")).unwrap();
    let bad = text.replace("\"dt\": 0.25", "\"dt\": 0.3");
    assert_ne!(bad, text);
    let path = out.path().join("bad.cfg");
    std::fs::write(&path, bad).unwrap();
    let o = epidelay(&["run", "--config", &path.display().to_string()], out.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.dt"), "{o:?}");
}

#[test]
fn divergence_exits_with_3_and_keeps_partial_output() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(&["run", "--config", &cfg("ode_phi_unstable_sigma20")], out.path());
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    assert!(out.path().join("ode_phi_unstable_sigma20/totals.csv").exists());
}

#[test]
fn pde_run_writes_snapshots() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(&["run", "--config", &cfg("pde_lockdown")], out.path());
    assert!(o.status.success(), "{o:?}");
    let dir = out.path().join("pde_lockdown");
    for t in [0, 35, 70, 105, 140, 175, 210, 267] {
        let snap = std::fs::read_to_string(dir.join(format!("snapshots/t_{t}.csv"))).unwrap();
        assert_eq!(snap.lines().count(), 2002, "t = {t}");
    }
    assert!(dir.join("plot.py").exists());
}

#[test]
fn stability_classifies_delay_bound_cases() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(&["stability", "--phi-r", "0.09375", "--phi-d", "0.0125", "--sigma", "15"], out.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("UNSTABLE"), "{}", stdout(&o));

    let o = epidelay(&["stability", "--phi-r", "0.03125", "--phi-d", "0.0046875", "--sigma", "20"], out.path());
    assert!(stdout(&o).starts_with("STABLE"), "{}", stdout(&o));

    let o = epidelay(&["stability", "--phi-r", "0", "--phi-d", "0", "--sigma", "5"], out.path());
    assert!(stdout(&o).starts_with("STABLE (margin 1.57"), "{}", stdout(&o));
}

#[test]
fn stability_point_writes_roots() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(&["stability", "--point", "0.5,-1", "--k-max", "5"], out.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("STABLE"), "{}", stdout(&o));
    let roots = std::fs::read_to_string(out.path().join("stability/roots.csv")).unwrap();
    assert_eq!(roots.lines().next(), Some("branch,re,im"));
    assert_eq!(roots.lines().count(), 1 + 11);
    let boundary = std::fs::read_to_string(out.path().join("stability/boundary.csv")).unwrap();
    assert_eq!(boundary.lines().count(), 401);

    let o = epidelay(&["stability", "--point", "1,0"], out.path());
    assert!(stdout(&o).starts_with("UNSTABLE"), "{}", stdout(&o));
}

#[test]
fn compare_homogeneous_pair() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(
        &["compare", "--ode-config", &cfg("ode_table1_sigma20"), "--pde-config", &cfg("pde_homogeneous")],
        out.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let dir = out.path().join("ode_table1_sigma20__vs__pde_homogeneous");
    let metrics = std::fs::read_to_string(dir.join("metrics.txt")).unwrap();
    let rel: f64 = metrics
        .lines()
        .find_map(|l| l.strip_prefix("max_pointwise_rel = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel < 1e-6, "{metrics}");
    assert_eq!(std::fs::read_to_string(dir.join("compare.csv")).unwrap().lines().count(), 1070);
}

#[test]
fn compare_rejects_mismatched_delay() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(
        &["compare", "--ode-config", &cfg("ode_table1_sigma5"), "--pde-config", &cfg("pde_homogeneous")],
        out.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn sweep_runs_in_parallel() {
    let out = tempfile::tempdir().unwrap();
    let o = epidelay(
        &[
            "sweep",
            "--jobs",
            "3",
            &cfg("ode_table1_sigma5"),
            &cfg("ode_table1_sigma10"),
            &cfg("seird_table1"),
        ],
        out.path(),
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("3 of 3 scenarios completed"));
    for l in ["ode_table1_sigma5", "ode_table1_sigma10", "seird_table1"] {
        assert!(out.path().join(l).join("totals.csv").exists());
    }
}

#[test]
fn list_scenarios_writes_files() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("cfg");
    let o = epidelay(&["list-scenarios", "--write", &dir.display().to_string()], out.path());
    assert!(o.status.success(), "{o:?}");
    let written = std::fs::read_dir(&dir).unwrap().count();
    let shipped = std::fs::read_dir(scenarios()).unwrap().count();
    assert_eq!(written, shipped);
}
