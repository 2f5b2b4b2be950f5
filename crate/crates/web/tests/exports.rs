use qutrit_dba_web::{explore, simulate, yield_curve};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn explore_reports_the_three_detection_levels() {
    let hit = parse(explore("II", 2, "II", 1, "II", 0, "none", 1).unwrap());
    assert!((hit["detection"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(hit["honest_detection"], "1");

    let miss = parse(explore("I", 1, "I", 1, "I", 0, "none", 1).unwrap());
    assert!(miss["detection"].as_f64().unwrap().abs() < 1e-12);

    let mixed = parse(explore("I", 0, "II", 0, "I", 0, "none", 2).unwrap());
    assert!((mixed["detection"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(mixed["honest_detection"], "1/3");
}

#[test]
fn explore_applies_the_attack_channel() {
    let r = parse(explore("I", 0, "I", 0, "I", 0, "intercept_computational", 2).unwrap());
    assert!((r["detection"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(r["purity"].as_f64().unwrap() < 0.5);
    let total: f64 = r["probabilities"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn explore_rejects_bad_input() {
    assert!(explore("III", 0, "I", 0, "I", 0, "none", 1).is_err());
    assert!(explore("I", 0, "I", 2, "I", 0, "none", 1).is_err());
    assert!(explore("I", 0, "I", 0, "I", 0, "teleport", 1).is_err());
    assert!(explore("I", 0, "I", 0, "I", 0, "none", 3).is_err());
}

#[test]
fn yield_curve_tracks_efficiency() {
    let rows = parse(yield_curve(20_000, 4, 5).unwrap());
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let eta = r["efficiency"].as_f64().unwrap();
        let y = r["yield"].as_f64().unwrap();
        assert!((r["theory"].as_f64().unwrap() - eta / 12.0).abs() < 1e-12);
        assert!((y - eta / 12.0).abs() < 0.01, "eta {eta}: {y}");
    }
    assert!(yield_curve(20_000, 0, 5).is_err());
    assert!(yield_curve(0, 4, 5).is_err());
}

#[test]
fn simulate_runs_cli_arguments() {
    let json = parse(simulate("--scenario traitor_a --trials 5 --seed 2 --format json").unwrap());
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["aggregates"]["dba_success_rate"], 1.0);
    let summary = simulate("--scenario honest --trials 2 --length 100").unwrap();
    assert!(summary.contains("yield"));
    assert!(simulate("--scenario honest --trials 100000").is_err());
    assert!(simulate("--scenario").is_err());
}
