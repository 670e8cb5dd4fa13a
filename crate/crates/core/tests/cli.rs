use std::fs;
use std::process::{Command, Output};

fn swarmctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmctl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_reports_classifications() {
    let o = swarmctl(&["analyze", "--model", "example1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("[coexistence]") && s.contains("classification = center"), "{s}");
    assert!(s.contains("valid          = false"));

    let o = swarmctl(&["analyze", "--model", "example2", "--set", "mu=0.01"]);
    assert!(stdout(&o).contains("hopf-candidate"));
    let o = swarmctl(&["analyze", "--model", "example2", "--set", "mu=-0.1"]);
    assert!(stdout(&o).contains("classification = stable"));

    let o = swarmctl(&["--format", "json", "analyze", "--model", "custom", "--matrix", "0,1;-1,0", "--point", "0.5,0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["label"], "given");
}

#[test]
fn singular_equilibrium_is_surfaced() {
    let o = swarmctl(&["analyze", "--model", "example1", "--set", "k12=0.4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular equilibrium"));
}

#[test]
fn sweep_rows_and_crossing() {
    let o = swarmctl(&["sweep", "--model", "example2", "--param", "mu", "--from", "-0.1", "--to", "0.1", "--steps", "21"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let rows = s.lines().filter(|l| !l.starts_with('#') && !l.starts_with("mu,")).count();
    assert_eq!(rows, 21);
    assert!(s.contains("# crossings=0"), "{s}");
}

#[test]
fn config_errors_exit_with_2() {
    let o = swarmctl(&["sweep", "--model", "example2", "--param", "nu", "--from", "0", "--to", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "fidelity = \"ssa\"\nt_end = 1.0\ndt = 0.0\ntrials = 0\n[model]\nkind = \"example2\"\nmu = 0.0\n[initial]\ncounts = [1, 2]\n").unwrap();
    let o = swarmctl(&["ssa", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for field in ["dt", "trials", "initial.counts"] {
        assert!(err.contains(field), "{field} missing from {err}");
    }

    let o = swarmctl(&["preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stalled_run_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("stall.toml");
    fs::write(
        &cfg,
        "fidelity = \"ssa\"\nt_end = 1.0\ndt = 0.1\n[model]\nkind = \"example1\"\nk10 = 1.0\nk12 = 1.0\nk20 = 1.0\nk21 = 2.0\n[initial]\ncounts = [1, 1, 1]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = swarmctl(&["ssa", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trial 0"));
}

#[test]
fn ode_run_writes_files_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ode.toml");
    fs::write(
        &cfg,
        "fidelity = \"ode\"\nt_end = 2.0\ndt = 0.1\nseed = 9\n[model]\nkind = \"example2\"\nmu = 0.05\n[initial]\nfractions = [0.1, 0.2, 0.4, 0.3]\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = swarmctl(&["ode", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trials", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trial = fs::read_to_string(out.join("trial_001.csv")).unwrap();
    let mut lines = trial.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# model=example2-ode, params=mu=0.05;rate=1, seed=9, trial=1"), "{header}");
    assert_eq!(lines.next().unwrap(), "t,Y_1,Y_2,Y_3,Y_4,Ystar_1,Ystar_2,Ystar_3,Ystar_4");
    for f in ["trial_000.csv", "reference.csv", "aggregate.csv", "report.json", "config.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["trials"].as_array().unwrap().len(), 2);
    assert_eq!(report["mean_rmse"], 0.0);
}

#[test]
fn json_format_and_preset_listing() {
    let o = swarmctl(&["preset", "list"]);
    let names = stdout(&o);
    for n in ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b"] {
        assert!(names.lines().any(|l| l == n), "{n}");
    }
    let o = swarmctl(&["preset", "fig3b", "--print"]);
    assert!(stdout(&o).contains("radius = 5.0"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = swarmctl(&["preset", "fig5a", "--format", "json", "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("trial_000.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["y"][0].as_array().unwrap().len(), 3);
    assert!(out.join("encounters_000.csv").exists());
}
