use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn rupture(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_rupture"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_one_record_and_two_profiles_per_event() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(rupture(&["simulate", "--preset", "ex1", "--max-events", "11"], &out), 0);
    let lines: Vec<Value> = fs::read_to_string(out.join("events.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 11);
    for (i, e) in lines.iter().enumerate() {
        assert_eq!(e["j"], i + 1);
        assert_eq!(e["reset_intervals"], serde_json::json!([0]));
        assert!(out.join(e["pre_csv"].as_str().unwrap()).exists());
        assert!(out.join(e["post_csv"].as_str().unwrap()).exists());
    }
    let pre = fs::read_to_string(out.join("profile_eta_pre_001.csv")).unwrap();
    assert_eq!(pre.lines().next(), Some("x,value"));
    assert_eq!(pre.lines().count(), 1025);

    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config"]["alpha"], 1.0);
    assert_eq!(manifest["config"]["numerics"]["grid_points"], 1024);
}

#[test]
fn coupled_simulation_also_writes_h_and_zeta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex3");
    assert_eq!(rupture(&["simulate", "--preset", "ex3", "--max-events", "2"], &out), 0);
    assert!(out.join("profile_h_pre_002.csv").exists());
    assert!(out.join("profile_zeta_pre_002.csv").exists());
}

#[test]
fn t_end_stops_the_clock_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    assert_eq!(rupture(&["simulate", "--preset", "ex1", "--t-end", "0.05"], &out), 0);
    let report = json(&out.join("report.json"));
    assert_eq!(report["final_time"], 0.05);
    assert_eq!(report["events"], 3);
}

#[test]
fn bounds_for_constant_start() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    assert_eq!(rupture(&["bounds", "--preset", "ex1", "--eta0", "const:0.03"], &out), 0);
    let r = json(&out.join("report.json"));
    let lower = r["t_lower"].as_f64().unwrap();
    let upper = r["t_upper"].as_f64().unwrap();
    assert!((lower - (3.03f64 / (3.0 + 3e-14)).ln()).abs() < 1e-14);
    assert!((lower - 0.009_950_3).abs() < 1e-7);
    assert!((upper - (0.03f64 / 3e-14).ln()).abs() < 1e-12);
    assert!((upper - 27.631).abs() < 1e-3);
}

#[test]
fn stationary_reports_localization() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    assert_eq!(rupture(&["stationary", "--preset", "ex1"], &out), 0);
    let r = json(&out.join("report.json"));
    assert_eq!(r["condition_s"]["rupture_interval_index"], 0);
    assert_eq!(r["condition_s"]["threshold_localized"], true);
    assert_eq!(r["validation"]["condition_c_holds"], true);
    let csv = fs::read_to_string(out.join("stationary.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,s"));
}

#[test]
fn find_then_verify_ex1() {
    let dir = tempfile::tempdir().unwrap();
    let found = dir.path().join("find");
    assert_eq!(rupture(&["find-periodic", "--preset", "ex1", "--max-iter", "60"], &found), 0);
    let r = json(&found.join("report.json"));
    assert_eq!(r["converged"], true);
    assert_eq!(r["interval"], 0);
    assert!(found.join("profile_iter_001_start.csv").exists());

    let spec = format!("csv:{}", found.join("profile_fixed.csv").display());
    let checked = dir.path().join("verify");
    assert_eq!(rupture(&["verify", "--preset", "ex1", "--eta0", &spec], &checked), 0);
    assert_eq!(json(&checked.join("report.json"))["periodic"], true);
}

#[test]
fn ex2_search_is_a_model_violation() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rupture(&["find-periodic", "--preset", "ex2"], &dir.path().join("f")), 1);
}

#[test]
fn ex3_does_not_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    assert_eq!(rupture(&["verify", "--preset", "ex3"], &out), 1);
    assert_eq!(json(&out.join("report.json"))["periodic"], false);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    assert_eq!(rupture(&["simulate", "--preset", "ex1", "--set", "eta_a=0"], &out), 2);
    assert_eq!(rupture(&["simulate", "--preset", "ex9"], &out), 2);
    assert_eq!(rupture(&["simulate", "--preset", "ex1", "--set", "colour=1"], &out), 2);
    assert_eq!(rupture(&["simulate", "--preset", "ex1", "--eta0", "wave:1"], &out), 2);

    let missing = dir.path().join("absent.json");
    assert_eq!(rupture(&["simulate", "--config", missing.to_str().unwrap()], &out), 2);

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ not json").unwrap();
    assert_eq!(rupture(&["simulate", "--config", broken.to_str().unwrap()], &out), 2);
}

#[test]
fn scenario_file_round_trips_through_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    assert_eq!(rupture(&["stationary", "--preset", "ex2", "--set", "numerics.grid_points=256"], &first), 0);
    let scenario = dir.path().join("scenario.json");
    let manifest = json(&first.join("manifest.json"));
    fs::write(&scenario, serde_json::to_string(&manifest["config"]).unwrap()).unwrap();

    let second = dir.path().join("second");
    assert_eq!(rupture(&["stationary", "--config", scenario.to_str().unwrap()], &second), 0);
    assert_eq!(json(&second.join("manifest.json"))["config"], manifest["config"]);
}

#[test]
fn stagnating_events_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n");
    // eta_a so close to eta_c that consecutive ruptures fall inside one step
    assert_eq!(
        rupture(&["simulate", "--preset", "ex1", "--set", "eta_a=1e-9", "--max-events", "5"], &out),
        3
    );
}
