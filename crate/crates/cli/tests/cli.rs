use std::process::Command;

use chiral_cli::config::parse_config;
use chiral_cli::output::config_hash;
use chiral_cli::PRESETS;

fn chiral() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chiral"))
}

#[test]
fn every_preset_parses_and_validates() {
    for (name, text) in PRESETS {
        let cfg = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(cfg.violations().is_empty(), "{name}");
    }
}

#[test]
fn canonical_form_round_trips_with_stable_hash() {
    for (name, text) in PRESETS {
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.canonical()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(config_hash(&cfg), config_hash(&again), "{name}");
    }
}

#[test]
fn negative_rate_is_reported_by_path() {
    let err = parse_config("engine = \"markov\"\n[markov]\ngamma_r = -1.0\n").unwrap_err();
    assert!(err.violations.iter().any(|v| v.path.starts_with("markov") && v.expected.contains("gamma_r")), "{err}");
}

#[test]
fn all_violations_reported_together() {
    let text = "engine = \"markov\"\nbogus = 1\n[time]\ndt = \"x\"\n[markov]\ngama_l = 0.1\ngamma_r = -1.0\n";
    let err = parse_config(text).unwrap_err();
    let paths: Vec<&str> = err.violations.iter().map(|v| v.path.as_str()).collect();
    for p in ["bogus", "markov.gama_l", "time.dt", "markov"] {
        assert!(paths.contains(&p), "missing {p} in {paths:?}");
    }
}

#[test]
fn undriven_chiral_run_writes_summary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = chiral()
        .args(["simulate", "markov", "--preset", "undriven-chiral", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("undriven-chiral_summary.json")).unwrap()).unwrap();
    let r = &summary["results"];
    let c = r["first_peak_concurrence"].as_f64().unwrap();
    let t = r["first_peak_time"].as_f64().unwrap();
    assert!((c - 2.0 / std::f64::consts::E).abs() < 1e-3, "{c}");
    assert!((t - 1.0).abs() < 1e-2, "{t}");
    assert_eq!(summary["schema_version"], 1);

    let csv = std::fs::read_to_string(dir.path().join("undriven-chiral_trajectory.csv")).unwrap();
    let hash = summary["config_hash"].as_str().unwrap();
    assert!(csv.lines().take(4).any(|l| l.contains(hash)));
}

#[test]
fn bad_config_prints_error_json_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "engine = \"markov\"\n[markov]\ngamma_l = -2.0\n").unwrap();
    let out = chiral().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(doc["error"], "config");
    assert!(!doc["violations"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let out = chiral().args(["simulate", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
