use std::path::Path;
use std::process::{Command, Output};

fn erl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erl")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let vacuum = write(dir.path(), "vac.json", r#"{"lambda": 1, "means": [0, 0], "moments": [[0.5, 0], [0, 0.5]]}"#);
    let out = erl(&["validate", &vacuum]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["kind"], "state");
    assert_eq!(v["saturating"], true);

    let narrow = write(dir.path(), "narrow.json", r#"{"lambda": 2, "means": [0, 0], "moments": [[0.5, 0], [0, 0.5]]}"#);
    let out = erl(&["validate", &narrow]);
    assert_eq!(out.status.code(), Some(1));
    // V = (λ/4)I ⇒ γ = (λ/2)I ⇒ min eig of γ + iλΣ is −λ/2.
    let min = json(&out)["minEigenvalue"].as_f64().unwrap();
    assert!((min + 1.0).abs() < 1e-10, "{min}");

    let broken = write(dir.path(), "broken.json", r#"{"lambda": 1, "means": [0, 0], "moments": "#);
    assert_eq!(erl(&["validate", &broken]).status.code(), Some(2));
    assert_eq!(erl(&["validate", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn validate_channel_and_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let loss = write(
        dir.path(),
        "loss.json",
        r#"{"lambda": 1, "X": [[0.7071067811865476, 0], [0, 0.7071067811865476]], "N": [[0.25, 0], [0, 0.25]]}"#,
    );
    assert_eq!(erl(&["validate", &loss]).status.code(), Some(0));
    let amp = write(dir.path(), "amp.json", r#"{"lambda": 1, "X": [[2, 0], [0, 2]], "N": [[0, 0], [0, 0]]}"#);
    assert_eq!(erl(&["validate", &amp]).status.code(), Some(1));
    let het = write(dir.path(), "het.json", r#"{"lambda": 1, "targetModes": [0], "moments": [[0.5, 0], [0, 0.5]]}"#);
    let out = erl(&["validate", &het, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("path,kind,cupSatisfied,minEigenvalue,saturating,maxEntSatisfied\n"));
    assert!(text.contains(",indicator,true,"));
}

#[test]
fn scenarios_pass_and_are_byte_stable() {
    let args = ["scenario", "teleport", "--r", "8", "--N", "2000", "--seed", "1"];
    let a = erl(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, erl(&args).stdout);
    assert_eq!(json(&a)["scenarioName"], "teleportation");

    for name in ["epr", "appendix-a", "entanglement-swap", "von-neumann", "noncommutativity"] {
        let out = erl(&["scenario", name, "--N", "2000", "--r", "6"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let out = erl(&["scenario", "no-cloning", "--random-channels", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let out = erl(&["scenario", "concentration", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn appendix_a_reports_violation() {
    let out = erl(&["scenario", "appendix-a"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["statistics"]["posteriorUncertaintyProduct"].as_f64().unwrap() < 0.5);
    assert!(v["statistics"]["posteriorCupMinEigenvalue"].as_f64().unwrap() < 0.0);
}

#[test]
fn csv_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("epr.csv");
    let out = erl(&["scenario", "epr", "--N", "1000", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scenario,check,expected,observed,tolerance,pass"));
    assert!(lines.all(|l| l.starts_with("epr,") && l.ends_with(",true")));
}

#[test]
fn usage_errors() {
    assert_eq!(erl(&["scenario", "bell"]).status.code(), Some(2));
    assert_eq!(erl(&["scenario", "epr", "--N", "0"]).status.code(), Some(2));
    assert_eq!(erl(&["scenario", "epr", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(erl(&["scenario", "epr", "--tol", "0"]).status.code(), Some(2));
    assert_eq!(erl(&["equivalence", "--scenarios", "bell"]).status.code(), Some(2));
    assert_eq!(erl(&[]).status.code(), Some(2));
}

#[test]
fn invalid_input_state_fails() {
    let dir = tempfile::tempdir().unwrap();
    let narrow = write(dir.path(), "narrow.json", r#"{"lambda": 1, "means": [0, 0], "moments": [[0.1, 0], [0, 0.1]]}"#);
    assert_eq!(erl(&["scenario", "teleport", "--input", &narrow, "--N", "100"]).status.code(), Some(1));
}

#[test]
fn equivalence_and_negative_control() {
    let out = erl(&["equivalence", "--N", "3000", "--seeds", "1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["summary"]["rows"].as_array().unwrap().len(), 16);

    let out = erl(&["equivalence", "--N", "3000", "--scenarios", "channel", "--corrupt-channel"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupted-channel"));

    // Underpowered runs still pass: the standard errors widen with the noise.
    assert_eq!(erl(&["equivalence", "--N", "100"]).status.code(), Some(0));
}
