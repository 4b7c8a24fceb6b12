//! Runs the binary and checks exit codes and report contents.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn square_root_is_two_monotone() {
    let out = run(&[
        "check",
        "--fn",
        "t^0.5",
        "--interval",
        "0,1",
        "--order",
        "2",
        "--property",
        "monotone",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));
}

#[test]
fn cube_fails_with_a_witness_in_the_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.json");
    let out = run(&[
        "check",
        "--fn",
        "t^3",
        "--interval",
        "0,2",
        "--order",
        "2",
        "--property",
        "monotone",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["report"]["verdict"], "FAIL");
    let witnesses = v["report"]["witnesses"].as_array().unwrap();
    assert!(!witnesses.is_empty());
    assert!(witnesses[0]["margin"].as_f64().unwrap() < 0.0);
    for key in ["tool_version", "schema_version", "config", "report", "timings_ms"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["config"]["plan"]["seed"], 42);
}

#[test]
fn json_reports_are_identical_apart_from_timings() {
    let args = [
        "check",
        "--fn",
        "exp(t)",
        "--interval",
        "0,1",
        "--order",
        "2",
        "--property",
        "qn",
        "--format",
        "json",
    ];
    let mut a = json(&run(&args));
    let mut b = json(&run(&args));
    a.as_object_mut().unwrap().remove("timings_ms");
    b.as_object_mut().unwrap().remove("timings_ms");
    assert_eq!(a, b);
}

#[test]
fn cauchy_scenario_reproduces() {
    let out = run(&["repro", "--id", "L-4.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("REPRODUCED"));
}

#[test]
fn precision_study_reports_a_discrepancy() {
    let out = run(&["repro", "--id", "TH-5.8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let study = &v["report"]["scenarios"][0]["study"];
    assert!(study["instability"].as_bool().unwrap());
    assert!(study["rounded_blowup"].as_bool().unwrap());
}

#[test]
fn repro_lists_scenarios() {
    let out = run(&["repro", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["EX-3.2", "TH-5.8", "TH-5.10", "L-5.7"] {
        assert!(text.contains(id), "{id}");
    }
}

#[test]
fn matrix_dumps() {
    let out = run(&["matrix", "--kind", "cauchy", "--order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("cauchy,3,"));
    assert_eq!(text.lines().count(), 4);

    let out = run(&[
        "matrix",
        "--kind",
        "loewner",
        "--fn",
        "-log(1+t)",
        "--nodes",
        "0.1,0.5,0.9",
        "--dump",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["order"], 3);
    assert_eq!(v["report"]["psd"]["psd"], false);
}

#[test]
fn battery_on_minus_log() {
    let out = run(&[
        "battery",
        "--fn",
        "-log(1+t)",
        "--alpha",
        "1",
        "--order",
        "2",
        "--samples",
        "500",
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    assert!(String::from_utf8_lossy(&out.stdout).contains("(1)_2"));
}

#[test]
fn contraction_search_for_square_finds_nothing() {
    let out = run(&[
        "witness",
        "--fn",
        "t^2",
        "--interval",
        "0,2",
        "--closed-left",
        "--order",
        "2",
        "--kind",
        "contraction",
        "--samples",
        "2000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn mollify_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("abs.csv");
    let rows: String = (0..=20)
        .map(|i| format!("{},{}\n", i as f64 / 20.0, (i as f64 / 20.0 - 0.5).abs()))
        .collect();
    std::fs::write(&path, format!("t,f\n{rows}")).unwrap();
    let out = run(&[
        "mollify",
        "--input",
        path.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--grid",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().next(), Some("t,f,f_eps"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn usage_and_numeric_errors() {
    assert_eq!(run(&["check", "--fn", "t^"]).status.code(), Some(2));
    assert_eq!(
        run(&[
            "check",
            "--fn",
            "t^",
            "--interval",
            "0,1",
            "--order",
            "2",
            "--property",
            "monotone"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "check",
            "--fn",
            "t",
            "--interval",
            "1,0",
            "--order",
            "2",
            "--property",
            "monotone"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run(&["repro", "--id", "NOPE"]).status.code(), Some(2));
    assert_eq!(
        run(&["matrix", "--kind", "dobsch", "--fn", "log(t)", "--at", "-1", "--order", "2"])
            .status
            .code(),
        Some(3)
    );
}
