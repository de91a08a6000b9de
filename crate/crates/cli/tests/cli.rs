use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;
use verdict_core::{fit_default_model, infer, Evidence, LearningConfig};

const SHOULD_WIN_GOLDEN: f64 = 0.6235294117647059;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_verdict-bn"));
    c.env_remove("VERDICT_BN_MODEL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn learn(dir: &Path, name: &str, alpha: &str) -> String {
    let path = dir.join(name);
    let out = run(&["learn", "--alpha", alpha, "--out", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path.to_str().unwrap().to_string()
}

#[test]
fn learn_then_scenario_reports_golden() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    let out = run(&[
        "scenario",
        "plaintiff-should-win",
        "--model",
        &model,
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let won = v["posteriors"]["CaseOutcome"]["won"].as_f64().unwrap();
    assert!((won - SHOULD_WIN_GOLDEN).abs() < 1e-12);

    let table = run(&["scenario", "plaintiff-does-win", "--model", &model]);
    assert!(table.status.success());
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("scenario: plaintiff-does-win"));
    assert!(text.lines().any(|l| l.starts_with("NecessaryRequirements")
        && l.contains("true")
        && l.ends_with("1.000000")));
}

#[test]
fn learn_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(learn(dir.path(), "a.json", "1.0")).unwrap();
    let b = std::fs::read(learn(dir.path(), "b.json", "1.0")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn learn_from_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cases.csv");
    std::fs::write(&csv, verdict_core::negligence::AUDIT_EXTRACT_CSV).unwrap();
    let from_file = dir.path().join("f.json");
    let out = run(&[
        "learn",
        "--data",
        csv.to_str().unwrap(),
        "--alpha",
        "1",
        "--out",
        from_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let builtin = learn(dir.path(), "b.json", "1");
    assert_eq!(
        std::fs::read(from_file).unwrap(),
        std::fs::read(builtin).unwrap()
    );

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "case_id,outcome\nx,won\n").unwrap();
    let out = run(&["summarize", "--data", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duty_established"));
}

#[test]
fn infer_json_round_trips_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    let out = run(&[
        "infer",
        "--model",
        &model,
        "--evidence",
        "DutyBreached=true",
        "--evidence",
        "Ameliorated=false",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();

    let net = fit_default_model(&LearningConfig::with_alpha(1.0)).unwrap();
    let ev = Evidence::new()
        .with("DutyBreached", "true")
        .with("Ameliorated", "false");
    let ids: Vec<&str> = net
        .variables()
        .iter()
        .map(|v| v.id())
        .filter(|id| ev.get(id).is_none())
        .collect();
    let direct = infer(&net, &ev, &ids).unwrap();
    assert_eq!(
        v["evidence_probability"].as_f64().unwrap(),
        direct.evidence_probability
    );
    for p in &direct.posteriors {
        for (s, x) in p.states.iter().zip(&p.distribution) {
            assert_eq!(
                v["posteriors"][&p.variable][s].as_f64().unwrap().to_bits(),
                x.to_bits()
            );
        }
    }
}

#[test]
fn infer_with_query_and_env_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    let out = bin()
        .env("VERDICT_BN_MODEL", &model)
        .args([
            "infer",
            "--evidence",
            "CaseOutcome=won",
            "--query",
            "RiskExists",
            "Knowledge",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut keys: Vec<&String> = v["posteriors"].as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(keys, ["Knowledge", "RiskExists"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.find("\"RiskExists\"").unwrap() < text.find("\"Knowledge\"").unwrap());
    assert_eq!(v["posteriors"]["RiskExists"]["true"], 1.0);
}

#[test]
fn bad_state_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    let out = run(&[
        "infer",
        "--model",
        &model,
        "--evidence",
        "CaseOutcome=banana",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("banana"));
    assert!(out.stdout.is_empty());

    let out = run(&["scenario", "nope", "--model", &model]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_evidence_is_reported_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    let out = run(&[
        "infer",
        "--model",
        &model,
        "--evidence",
        "CaseOutcome=won",
        "--evidence",
        "DutyEstablished=false",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["zero_evidence"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    assert_eq!(run(&["validate", "--model", &model]).status.code(), Some(0));
    assert_eq!(
        run(&["validate", "--model", "/no/such/file"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["validate"]).status.code(), Some(2));
    assert_eq!(
        run(&["infer", "--model", &model, "--evidence", "novalue"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["infer", "--model", &model, "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["learn", "--alpha", "-1", "--out", "/dev/null"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["serve", "--model", &model]).status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"variables":[{"id":"A","states":["true","false"]}],"cpts":[{"child":"A","parents":[],"rows":[[0.4,0.4]]}]}"#).unwrap();
    let out = run(&["validate", "--model", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad row"));
}

#[test]
fn summarize_prints_totals() {
    let out = run(&["summarize"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "outcome: won=3 lost=12"));
    assert!(text
        .lines()
        .any(|l| l == "jurisdiction: NSW=10 NT=1 QLD=2 VIC=2"));
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    let model = learn(dir.path(), "m.json", "1.0");
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let mut child = bin()
        .args(["serve", "--model", &model, "--port", &port.to_string()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();

    let deadline = Instant::now() + Duration::from_secs(20);
    let response = loop {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(mut s) => {
                write!(
                    s,
                    "GET /api/scenarios HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
                )
                .unwrap();
                let mut buf = String::new();
                s.read_to_string(&mut buf).unwrap();
                break buf;
            }
            Err(_) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(50)),
            Err(e) => {
                child.kill().ok();
                panic!("server did not come up: {e}");
            }
        }
    };
    child.kill().ok();
    child.wait().ok();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with(r#"["plaintiff-does-win","plaintiff-should-win"]"#));
}
