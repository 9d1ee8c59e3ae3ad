//! End-to-end tests of the `sgflow` binary: exit codes, report contents,
//! byte-level determinism, and the bit-for-bit restart guarantee.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sgflow::{BoundaryCondition, Field, Grid};

fn bin_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgflow"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin_cmd().args(args).output().expect("spawning sgflow");
    assert!(
        out.status.success(),
        "sgflow {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_fail(args: &[&str]) -> Output {
    let out = bin_cmd().args(args).output().expect("spawning sgflow");
    assert!(
        !out.status.success(),
        "sgflow {:?} unexpectedly succeeded\nstdout: {}",
        args,
        String::from_utf8_lossy(&out.stdout)
    );
    out
}

fn read(path: impl AsRef<Path>) -> String {
    let path = path.as_ref();
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn read_json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).expect("parsing JSON output")
}

/// Drop the only nondeterministic line (wall-clock timing) before comparing.
fn strip_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.contains("wall_time_ms")).collect::<Vec<_>>().join("\n")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn verify_default_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("v");
    run_ok(&["verify", "--out", out_dir.to_str().unwrap()]);

    let report = read_json(out_dir.join("verify_report.json"));
    assert_eq!(report["failed"], 0);
    assert_eq!(report["passed"], 10);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 10);
    for c in checks {
        assert_eq!(c["pass"], true, "check {} failed: {c}", c["name"]);
    }

    // manifest embeds the resolved config with auto gamma already numeric
    let manifest = read_json(out_dir.join("manifest.json"));
    assert_eq!(manifest["command"], "verify");
    assert_eq!(manifest["config"]["flow"]["gamma_spec"], "auto");
    let gamma = manifest["config"]["flow"]["gamma"].as_f64().unwrap();
    assert!(gamma > 1.9, "auto gamma for pendulum:0.05 should exceed sup|V22|, got {gamma}");
    assert_eq!(manifest["config"]["run"]["seed"], 42);
}

#[test]
fn verify_forced_tolerance_failure_lists_the_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("v");
    let out = run_fail(&[
        "verify",
        "--out",
        out_dir.to_str().unwrap(),
        "--tolerance",
        "power_law=1e-20",
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("power_law"));

    let report = read_json(out_dir.join("verify_report.json"));
    assert_eq!(report["failed"], 1);
    let bad = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "power_law")
        .unwrap();
    assert_eq!(bad["pass"], false);
    assert_eq!(bad["tolerance"].as_f64().unwrap(), 1e-20);
}

#[test]
fn verify_only_filter_selects_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("v");
    run_ok(&["verify", "--out", out_dir.to_str().unwrap(), "--only", "subordination"]);
    let report = read_json(out_dir.join("verify_report.json"));
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "subordination");

    run_ok(&["verify", "--out", out_dir.to_str().unwrap(), "--only", "quadrature"]);
    let report = read_json(out_dir.join("verify_report.json"));
    assert_eq!(report["checks"].as_array().unwrap().len(), 4);

    let out = run_fail(&["verify", "--out", out_dir.to_str().unwrap(), "--only", "nosuch"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("matched no checks"));
}

#[test]
fn flow_zero_potential_matches_mode_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.toml",
        r#"
[grid]
d = 1
N = 1
n = 64

[operator]
coeff = "identity"
discretization = "fourier"

[potential]
spec = "zero"

[flow]
gamma = 0.01
beta = 0.5
dt = 1e-3
t_end = 1.0
tol_residual = 1e-14

[run]
seed = 5
"#,
    );
    let grid = Grid::new(1, 1, 64, BoundaryCondition::Periodic).unwrap();
    let u0 = Field::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x[0]).sin()).unwrap();
    let u0_path = tmp.path().join("u0.csv");
    u0.write_csv(&u0_path).unwrap();

    let out_dir = tmp.path().join("run");
    run_ok(&[
        "flow",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--u0",
        u0_path.to_str().unwrap(),
    ]);

    let summary = read_json(out_dir.join("summary.json"));
    assert_eq!(summary["steps"], 1000);
    assert_eq!(summary["final_time"].as_f64().unwrap(), 1.0);
    assert!(summary["nan_at"].is_null());

    // the single Fourier mode decays by exactly exp(-t nu (gamma+nu)^-beta)
    let nu = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let factor = (-nu * (0.01 + nu).powf(-0.5)).exp();
    let got = Field::read_csv(out_dir.join("final_state.csv")).unwrap();
    let want = u0.scale(factor);
    assert!(
        got.sub(&want).max_norm() <= 1e-6,
        "mode-decay deviation {:.3e}",
        got.sub(&want).max_norm()
    );
}

#[test]
fn flow_runs_are_deterministic_and_restart_is_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let base = r#"
[potential]
spec = "pendulum:0.05"

[flow]
gamma = "auto"
dt = 1e-2
t_end = TEND
tol_residual = 1e-14

[run]
seed = 11
"#;
    let cfg_short =
        write_config(tmp.path(), "short.toml", &base.replace("TEND", "1.0"));
    let cfg_long = write_config(tmp.path(), "long.toml", &base.replace("TEND", "2.0"));

    let (a, b, c, long) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
        tmp.path().join("long"),
    );
    for dir in [&a, &b] {
        run_ok(&[
            "flow",
            "--config",
            cfg_short.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--u0",
            "random",
        ]);
    }
    // identical config + seed => byte-identical outputs; the manifests
    // differ only in the out-dir override they record
    assert_eq!(read(a.join("trajectory.csv")), read(b.join("trajectory.csv")));
    assert_eq!(read(a.join("final_state.csv")), read(b.join("final_state.csv")));
    let mut ma = read_json(a.join("manifest.json"));
    let mut mb = read_json(b.join("manifest.json"));
    ma["config"]["run"]["out"] = serde_json::Value::Null;
    mb["config"]["run"]["out"] = serde_json::Value::Null;
    assert_eq!(ma, mb);
    assert_eq!(
        strip_wall_time(&read(a.join("summary.json"))),
        strip_wall_time(&read(b.join("summary.json")))
    );

    // restarting from the dumped state continues the longer run bit-for-bit
    run_ok(&[
        "flow",
        "--config",
        cfg_long.to_str().unwrap(),
        "--out",
        long.to_str().unwrap(),
        "--u0",
        "random",
    ]);
    run_ok(&[
        "flow",
        "--config",
        cfg_short.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
        "--u0",
        a.join("final_state.csv").to_str().unwrap(),
    ]);
    assert_eq!(read(long.join("final_state.csv")), read(c.join("final_state.csv")));
}

#[test]
fn flow_nan_abort_dumps_last_good_state() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.toml",
        r#"
[potential]
spec = "expr:-0.25*y^4,-y^3,-3*y^2"

[flow]
gamma = 1.0
dt = 0.5
t_end = 50.0

[run]
seed = 42
"#,
    );
    let out_dir = tmp.path().join("run");
    run_fail(&[
        "flow",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--u0",
        "random",
        "--amplitude",
        "5.0",
    ]);
    let summary = read_json(out_dir.join("summary.json"));
    assert!(summary["nan_at"].as_f64().is_some());
    assert_eq!(summary["state_file"], "last_good_state.csv");
    let dumped = Field::read_csv(out_dir.join("last_good_state.csv")).unwrap();
    assert!(dumped.values().iter().all(|v| v.is_finite()));
}

#[test]
fn compare_clean_run_and_exploratory_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let ok_cfg = write_config(
        tmp.path(),
        "ok.toml",
        r#"
[grid]
n = 16

[potential]
spec = "pendulum:0.05"

[flow]
gamma = "auto"
dt = 1e-2
t_end = 0.5

[run]
seed = 9
"#,
    );
    let out_dir = tmp.path().join("cmp");
    run_ok(&[
        "compare",
        "--config",
        ok_cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--pairs",
        "8",
    ]);
    let report = read_json(out_dir.join("compare_report.json"));
    assert_eq!(report["violations"], 0);
    assert_eq!(report["pairs"], 8);
    assert!(report["min_gap"].as_f64().unwrap() > -1e-8);
    let gaps = read(out_dir.join("gaps.csv"));
    assert_eq!(gaps.lines().count(), 9);
    assert!(gaps.lines().skip(1).all(|l| l.ends_with("true")));

    // gamma below sup|V22| must be refused outside exploratory mode...
    let small_cfg = write_config(
        tmp.path(),
        "small.toml",
        &read(&ok_cfg).replace("gamma = \"auto\"", "gamma = 0.5"),
    );
    let out = run_fail(&[
        "compare",
        "--config",
        small_cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("cmp2").to_str().unwrap(),
        "--pairs",
        "2",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sup|V22|"));

    // ...and accepted (gaps recorded, nothing asserted) with --exploratory
    let out_dir3 = tmp.path().join("cmp3");
    run_ok(&[
        "compare",
        "--config",
        small_cfg.to_str().unwrap(),
        "--out",
        out_dir3.to_str().unwrap(),
        "--pairs",
        "2",
        "--exploratory",
    ]);
    let report = read_json(out_dir3.join("compare_report.json"));
    assert_eq!(report["exploratory"], true);
    assert!(report["min_gap"].as_f64().is_some());
}

#[test]
fn minimize_pendulum_half_converges_and_writes_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.toml",
        r#"
[grid]
n = 32

[potential]
spec = "pendulum:0.05"

[flow]
gamma = "auto"
dt = 1e-2
t_end = 60.0
tol_residual = 1e-8

[run]
seed = 1
"#,
    );
    let out_dir = tmp.path().join("min");
    run_ok(&[
        "minimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--omega",
        "1/2",
    ]);
    let summary = read_json(out_dir.join("summary.json"));
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["birkhoff_ok"], true);
    assert_eq!(summary["N"], 2);
    assert!(summary["residual"].as_f64().unwrap() < 1e-6);
    let mean_p = summary["mean_p"].as_f64().unwrap();
    assert!((-1e-9..1.0).contains(&mean_p), "mean_p {mean_p}");

    let p = Field::read_csv(out_dir.join("minimizer_p.csv")).unwrap();
    assert_eq!(p.grid().period(), 2);
    assert_eq!(p.grid().d(), 1);
    let u_lines = read(out_dir.join("minimizer_u.csv"));
    assert_eq!(u_lines.lines().count(), p.grid().num_nodes() + 1);
}

#[test]
fn sweep_golden_and_file_sources_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.toml",
        r#"
[grid]
n = 16

[potential]
spec = "pendulum:0.05"

[flow]
gamma = "auto"
dt = 1e-2
t_end = 30.0
tol_residual = 1e-6

[run]
seed = 3
"#,
    );
    let golden_dir = tmp.path().join("golden");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        golden_dir.to_str().unwrap(),
        "--golden",
        "--levels",
        "2",
    ]);
    let csv = read(golden_dir.join("sweep.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "omega,N,residual,birkhoff_ok,osc_Q,sup_p,energy_per_cell"
    );
    assert_eq!(csv.lines().count(), 3);
    let summary = read_json(golden_dir.join("summary.json"));
    assert_eq!(summary["n_rows"], 2);
    assert_eq!(summary["n_converged"], 2);
    assert_eq!(summary["n_errors"], 0);
    assert_eq!(summary["source"], "golden:2");

    // the same frequencies from a file give byte-identical rows
    let omega_file = tmp.path().join("omegas.txt");
    fs::write(&omega_file, "# golden convergents\n1/2\n2/3\n").unwrap();
    let file_dir = tmp.path().join("file");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        file_dir.to_str().unwrap(),
        "--omegas",
        omega_file.to_str().unwrap(),
    ]);
    assert_eq!(csv, read(file_dir.join("sweep.csv")));

    // a frequency source is mandatory and exclusive
    run_fail(&["sweep", "--config", cfg.to_str().unwrap(), "--out",
        tmp.path().join("x").to_str().unwrap()]);
    run_fail(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("y").to_str().unwrap(),
        "--golden",
        "--omegas",
        omega_file.to_str().unwrap(),
    ]);
}

#[test]
fn config_errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();

    // unknown key
    let bad_key = write_config(tmp.path(), "bad_key.toml", "[grid]\npoints = 5\n");
    let out = run_fail(&["verify", "--config", bad_key.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    // unparseable potential spec
    let bad_pot =
        write_config(tmp.path(), "bad_pot.toml", "[potential]\nspec = \"nosuch:1\"\n");
    run_fail(&["verify", "--config", bad_pot.to_str().unwrap()]);

    // auto gamma needs a potential that is periodic in y
    let bad_auto = write_config(
        tmp.path(),
        "bad_auto.toml",
        "[potential]\nspec = \"expr:0.5*y^2,y,1\"\n",
    );
    let out = run_fail(&["flow", "--config", bad_auto.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("auto"));

    // rotation vector dimension must match the config grid
    let out = run_fail(&[
        "minimize",
        "--out",
        tmp.path().join("m").to_str().unwrap(),
        "--omega",
        "1,0/2",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("d="));
}
