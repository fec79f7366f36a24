use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadmot")).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quadmot"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fgl_log_for_height_one() {
    let out = stdout(&run(&["--n", "1", "--truncation", "4", "fgl"]));
    assert!(out.starts_with("log(t) = t + 1/2·v·t^2 + 1/4·v^3·t^4\n"), "{out}");
    assert!(out.contains("[2](t) = (2)·t^1"));
}

#[test]
fn classify_rows_from_data() {
    let cases = [
        ("odd_dim2_1", "• • •"),
        ("odd_dim2_3", "• •–•"),
        ("odd_dim2_5", "•–•–•"),
        ("even_dim2_0", "• • • •"),
        ("even_dim2_2", "• •–• •"),
        ("even_dim2_4_split", "•–• •–•"),
        ("even_dim2_4", "•–•–•–•"),
        ("even_dim2_6", "•–•–•–•"),
    ];
    for (file, glyph) in cases {
        let out = stdout(&run(&["classify-k2", &data(&format!("k2/{file}.json"))]));
        assert_eq!(out.lines().nth(1), Some(glyph), "{file}\n{out}");
    }
}

#[test]
fn classify_from_stdin() {
    let p = r#"{"dim": 7, "splitting_pattern": [1, 2], "kahn_dims": {"1": 1, "2": 3}, "symbols": {"1": "d", "2": "a"}}"#;
    let out = stdout(&run_stdin(&["classify-k2", "-", "--format", "text"], p));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["glyph"], "• •–•");
}

#[test]
fn profile_and_diagram_give_the_same_picture() {
    let from_profile = stdout(&run(&["mdt", &data("d6_profile.json"), "--format", "text"]));
    let from_diagram = stdout(&run(&["mdt", &data("d6_chow.json"), "--format", "text"]));
    let a: serde_json::Value = serde_json::from_str(&from_profile).unwrap();
    let b: serde_json::Value = serde_json::from_str(&from_diagram).unwrap();
    let parts = |v: &serde_json::Value, k: &str| -> Vec<serde_json::Value> {
        v[k]["components"].as_array().unwrap().iter().map(|c| c["cells"].clone()).collect()
    };
    assert_eq!(parts(&a, "chow"), parts(&b, "chow"));
    assert_eq!(parts(&a, "morava"), parts(&b, "morava"));
    assert_eq!(b["morava"]["components"][0]["cells"], serde_json::json!(["2", "3u"]));

    let ascii = stdout(&run(&["mdt", &data("d6_chow.json")]));
    assert!(ascii.contains("edges: 0~3u 1~4 2-3u 2~5 3l-4 3l~6"), "{ascii}");
    assert!(ascii.contains("grey: 0 1 5 6"));
}

#[test]
fn svg_output_is_one_document() {
    let svg = stdout(&run(&["mdt", &data("d6_chow.json"), "--format", "svg"]));
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("stroke=\"red\""));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["mdt".to_string(), data("d6_profile.json")],
        vec!["diag".into(), "--dim".into(), "6".into(), "--format".into(), "text".into()],
        vec!["ring".into(), "--dim".into(), "5".into(), "--integral".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    }
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("quadmot-cli-{}.txt", std::process::id()));
    let o = run(&["motive", "pfister", "--symbol", "a", "--out", path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(text.matches("L_a").count(), 4);
}

#[test]
fn motive_queries() {
    assert_eq!(stdout(&run(&["motive", "tensor", "L_a(1)", "L_b(2), 1(0)"])), "L_a(1) ⊕ L_a+b(0)\n");
    assert_eq!(stdout(&run(&["motive", "kill", "L_a(1), L_b(0)", "--symbol", "a"])), "1(1) ⊕ L_b(0)\n");
    assert_eq!(stdout(&run(&["motive", "detect", "L_a(1), L_a(4)", "--symbol", "a", "--twist", "1"])), "2\n");
}

#[test]
fn malformed_input_exits_with_two() {
    let o = run_stdin(&["classify-k2", "-"], "{ not json");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[parse]"));
    let o = run_stdin(&["classify-k2", "-"], r#"{"dim": 7, "colour": 3}"#);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["motive", "tensor", "L_a", "1(0)"]).status.code(), Some(2));
    assert_eq!(run(&["fgl", "--format", "svg"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invariant_violations_exit_with_three() {
    let o = run_stdin(&["classify-k2", "-"], r#"{"dim": 8, "splitting_pattern": [3]}"#);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("violation[pattern]"), "{err}");

    let broken = r#"{"flavor": "chow", "dim": 6, "anisotropic": true,
        "components": [{"cells": ["0", "2", "3u"]}, {"cells": ["1", "3l", "4", "5", "6"]}]}"#;
    let o = run_stdin(&["mdt", "-"], broken);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[outer_violation]"));

    let o = run(&["ring", "--dim", "0"]);
    assert_eq!(o.status.code(), Some(3));
}
