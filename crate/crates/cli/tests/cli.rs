use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yamabe-cert"))
        .args(args)
        .env_remove("YAMABE_CERT_DEGREE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_k3_issues_certificate() {
    let o = run(&["certify", &fixture("k3_t2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).lines().next().unwrap(),
        "Y(M) = 0; index = 2; T-structure witness: cocycle valid"
    );
}

#[test]
fn certify_vanishing_index_exits_2() {
    let o = run(&["certify", &fixture("ahat_zero_t4.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("index vanishes"));
}

#[test]
fn certify_broken_cocycle_exits_2() {
    let o = run(&["certify", &fixture("broken_triangle.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("triple A,B,C"));
}

#[test]
fn certify_odd_rank_and_nonorientable() {
    let o = run(&["certify", &fixture("k3_circle_sign.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("stabilize_odd"));
    let o = run(&["certify", &fixture("k3_klein.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("orientation_double_cover"));
}

#[test]
fn malformed_input_reports_position() {
    let o = run(&["certify", &fixture("malformed.json")]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("malformed.json:5:"), "{err}");
}

#[test]
fn missing_file_and_bad_usage_exit_1() {
    assert_eq!(run(&["certify", "/nonexistent/spec.json"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn structured_output_is_deterministic_and_parses() {
    let files = [
        fixture("k3_t2.json"),
        fixture("ahat_zero_t4.json"),
        fixture("k3_dehn_triangle.json"),
        fixture("k3_klein.json"),
    ];
    let mut args = vec!["certify", "--format", "structured", "--jobs", "3", "--dump-classes"];
    args.extend(files.iter().map(String::as_str));
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(2));
    let text = stdout(&a);
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 4);
    assert_eq!(records[0]["certificate"]["verdict"], "Y(M) = 0");
    assert_eq!(records[0]["certificate"]["upper"]["computation"]["ahat_genus"], "2/1");
    assert_eq!(records[1]["certificate"]["verdict"], serde_json::Value::Null);
    for (r, f) in records.iter().zip(&files) {
        assert_eq!(r["file"], f.as_str());
    }
}

#[test]
fn jobs_do_not_change_output() {
    let files = [fixture("k3_t2.json"), fixture("k3_klein.json"), fixture("k3_circle_sign.json")];
    let mut one = vec!["certify", "--format", "structured"];
    one.extend(files.iter().map(String::as_str));
    let mut many = one.clone();
    many.extend(["--jobs", "3"]);
    assert_eq!(run(&one).stdout, run(&many).stdout);
}

#[test]
fn metric_attaches_threshold_without_changing_verdict() {
    let plain = run(&["certify", "--format", "structured", &fixture("k3_t2.json")]);
    let with = run(&[
        "certify",
        "--format",
        "structured",
        "--metric",
        &fixture("identity_metric.json"),
        &fixture("k3_t2.json"),
    ]);
    let a: serde_json::Value = serde_json::from_slice(&plain.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&with.stdout).unwrap();
    assert_eq!(a["certificate"]["verdict"], b["certificate"]["verdict"]);
    assert_eq!(b["certificate"]["upper"]["threshold"]["status"], "computed");
    assert_eq!(b["certificate"]["upper"]["threshold"]["n_star"], 10);
}

#[test]
fn ahat_from_flags_and_files() {
    let o = run(&["ahat", "--dim", "4", "--p1", "-48"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Â-genus = 2");
    let o = run(&["ahat", "--dim", "8", "--number", "p1^2=4", "--number", "p2=7"]);
    assert_eq!(stdout(&o).trim(), "Â-genus = 0");
    let o = run(&["ahat", &fixture("k3_base.json")]);
    assert_eq!(stdout(&o).trim(), "Â-genus = 2");
    let o = run(&["ahat", "--dim", "4", "--p1", "-48", "--nonspin"]);
    assert!(stdout(&o).contains("warning"));
    assert_eq!(run(&["ahat", "--dim", "5"]).status.code(), Some(1));
}

#[test]
fn degree_cap_env_var() {
    let capped = Command::new(env!("CARGO_BIN_EXE_yamabe-cert"))
        .args(["ahat", "--dim", "8", "--number", "p1^2=4", "--number", "p2=7"])
        .env("YAMABE_CERT_DEGREE_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(1));
    let roomy = Command::new(env!("CARGO_BIN_EXE_yamabe-cert"))
        .args(["certify", &fixture("k3_t2.json")])
        .env("YAMABE_CERT_DEGREE_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(roomy.status.code(), Some(0));
}

#[test]
fn decay_prints_csv_and_slope() {
    let o = run(&["decay", &fixture("identity_metric.json"), "--n", "1,2,4,8,16,32,64"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,norm\n1,1e0\n2,2.5e-1\n"));
    assert!(text.contains("slope = -2.00"));
    assert_eq!(run(&["decay", &fixture("identity_metric.json"), "--n", "1,2"]).status.code(), Some(1));
}

#[test]
fn threshold_from_flags_and_file() {
    let o = run(&["threshold", "--s-min", "1", "--dim", "6", "--norm", "1"]);
    assert_eq!(stdout(&o).trim(), "n* = 10");
    let o = run(&["threshold", &fixture("identity_metric.json")]);
    assert_eq!(stdout(&o).trim(), "n* = 10");
    assert_eq!(run(&["threshold", "--s-min", "0", "--dim", "6", "--norm", "1"]).status.code(), Some(1));
}

#[test]
fn cocycle_commands() {
    let o = run(&["cocycle-check", &fixture("k3_dehn_triangle.json")]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["cocycle-check", "--exact", &fixture("k3_dehn_triangle.json")]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["cocycle-check", &fixture("broken_triangle.json")]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["cover", "--format", "structured", &fixture("k3_t2.json"), "--n", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["degree"], "9");
    assert_eq!(v["cocycle"]["lattice_scale"], 3);
    assert_eq!(run(&["cover", &fixture("k3_dehn_triangle.json"), "--n", "2"]).status.code(), Some(1));
}

#[test]
fn stabilize_and_orient_outputs_are_specs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["stabilize", &fixture("k3_circle_sign.json")]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("stable.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let spec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(spec["fiber_rank"], 2);
    assert_eq!(spec["cocycle"]["transitions"]["A|B"]["linear"], serde_json::json!([[-1, 0], [0, -1]]));
    let again = run(&["certify", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));

    let o = run(&["orient", &fixture("k3_klein.json")]);
    let path = dir.path().join("cover.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let spec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(spec["base"]["pontryagin_numbers"]["p1"], -96);
    let certified = run(&["certify", path.to_str().unwrap()]);
    assert!(stdout(&certified).starts_with("Y(M) = 0; index = 4;"));
    assert_eq!(run(&["stabilize", &fixture("k3_t2.json")]).status.code(), Some(1));
}

#[test]
fn constants_commands() {
    let o = run(&["constants", "kahler", "--chi", "24", "--tau", "-16"]);
    assert!(stdout(&o).starts_with("Y = 0 "), "{}", stdout(&o));
    let o = run(&["constants", "--format", "structured", "sphere", "--n", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let y = v["value"]["value"].as_f64().unwrap();
    assert!((y - 8.0 * std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(run(&["constants", "sphere", "--n", "1"]).status.code(), Some(1));
    let o = run(&["constants", "vol", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn index_command() {
    let o = run(&["index", &fixture("k3_t2.json"), "--dump-classes"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("index = 2\n"));
    assert!(text.contains("ch(E) = 1 + y1·y2"));
    assert_eq!(run(&["index", &fixture("k3_circle_sign.json")]).status.code(), Some(1));
}
