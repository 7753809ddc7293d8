use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mhd-invariants"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn exec(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stdout:\n{}\nstderr:\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    }
    out
}

#[test]
fn run_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ot.cfg",
        "scenario.name = orszag-tang-25d\ngrid.nx = 16\nrun.t_end = 0.05\nreports.list = all\noutput.dump_residuals = true\n",
    );
    for sub in ["a", "b"] {
        let out = exec(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join(sub)));
        assert!(out.status.success());
    }
    let (files, differing) =
        mhd_invariants_cli::verify::compare_outputs(&dir.path().join("a"), &dir.path().join("b")).unwrap();
    assert!(files > 10, "{files}");
    assert_eq!(differing, 0);
    for name in ["run.json", "timeseries.csv", "provenance.txt"] {
        assert!(dir.path().join("a").join(name).exists(), "{name}");
    }
    let run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/run.json")).unwrap()).unwrap();
    assert_eq!(run["scenario"]["preset"], "orszag-tang-25d");
    assert!(run.get("wall_time").is_none());
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "scenario.name = uniform\n# comment\ngrid.nx = eight\n");
    let out = exec(bin().arg("run").arg("--config").arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:3"), "{err}");

    let cfg = write(dir.path(), "typo.cfg", "scenario.name = uniform\ngrid.nxx = 8\n");
    let out = exec(bin().arg("run").arg("--config").arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo.cfg:2"));
}

#[test]
fn advection_run_reports_the_exact_solution_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "adv.cfg",
        "scenario.name = advection\ngrid.nx = 32\nrun.t_end = 0.1\n",
    );
    let out = exec(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("o")));
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("exact-solution error psi"), "{text}");
}

#[test]
fn second_order_stencil_converges_at_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o2.cfg",
        "scenario.name = orszag-tang-25d\ngrid.nx = 16\ngrid.order = 2\nrun.t_end = 0.1\nreports.list = eq1.3\nconvergence.floor = 1.7\n",
    );
    let out = exec(bin().arg("convergence").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("c")));
    assert!(out.status.success());
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/convergence.json")).unwrap()).unwrap();
    let p = table["rows"][0]["orders"][1].as_f64().unwrap();
    assert!((p - 2.0).abs() < 0.3, "{p}");
    assert!(dir.path().join("c/level-2-n64/run.json").exists());
}

#[test]
fn convergence_floor_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o2.cfg",
        "scenario.name = orszag-tang-25d\ngrid.nx = 16\ngrid.order = 2\nrun.t_end = 0.1\nreports.list = eq1.3\nconvergence.floor = 3.5\n",
    );
    let out = bin().arg("convergence").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn verify_fails_when_the_lorentz_force_is_flipped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.cfg", "grid.nx = 16\nreports.lorentz_sign = -1\n");
    let out = bin().arg("verify").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("v")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with("criterion  2")).expect("criterion 2 line");
    assert!(line.ends_with("FAIL"), "{line}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["criteria"].as_array().unwrap().len(), 11);
}

#[test]
fn verify_rejects_unused_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.cfg", "scenario.name = uniform\n");
    let out = bin().arg("verify").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v.cfg:1"));
}

#[test]
fn verify_twice_writes_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.cfg", "grid.nx = 16\n");
    for sub in ["a", "b"] {
        let _ = bin().arg("verify").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join(sub)).output().unwrap();
    }
    let (files, differing) =
        mhd_invariants_cli::verify::compare_outputs(&dir.path().join("a"), &dir.path().join("b")).unwrap();
    assert!(files > 50, "{files}");
    assert_eq!(differing, 0);
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        let c = mhd_invariants_cli::Config::load(&p).unwrap();
        if c.contains("scenario.name") {
            mhd_invariants_cli::Scenario::from_config(&c).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        } else {
            mhd_invariants_cli::verify::Suite::from_config(&c).unwrap();
        }
        n += 1;
    }
    assert!(n >= 5);
}
