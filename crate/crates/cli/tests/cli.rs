use std::process::{Command, Output};

use serde_json::Value;

fn conetest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conetest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr {text:?} is not JSON: {e}"))
}

#[test]
fn project_monotone_point() {
    let out = conetest(&["project", "--cone", "monotone", "--x", "3,1,2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["projection"], serde_json::json!([2.0, 2.0, 2.0]));
    assert_eq!(v["polar"], serde_json::json!([1.0, -1.0, 0.0]));
    assert!((v["distance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn project_accepts_negative_coordinates_and_cone_documents() {
    let doc = r#"{"kind":"orthant","dim":3,"params":{}}"#;
    let out = conetest(&["project", "--cone-json", doc, "--x", "-1,2,-3"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        stdout_json(&out)["projection"],
        serde_json::json!([0.0, 2.0, 0.0])
    );
}

#[test]
fn project_from_a_cone_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cone.json");
    std::fs::write(
        &path,
        r#"{"kind":"circular","dim":2,"params":{"alpha":0.7853981633974483}}"#,
    )
    .unwrap();
    let out = conetest(&[
        "project",
        "--cone-json",
        path.to_str().unwrap(),
        "--x",
        "-1,0",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["projection"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c.as_f64().unwrap().abs() < 1e-12));
}

#[test]
fn radius_writes_csv_with_seed_and_n() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = conetest(&[
        "radius",
        "--cone",
        "orthant",
        "--dims",
        "4,8",
        "--n",
        "300",
        "--seed",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in [
        "d",
        "radius_sq",
        "bracket_lo",
        "bracket_hi",
        "seed",
        "n",
        "status",
    ] {
        assert!(header.contains(&col), "missing column {col}");
    }
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let idx = |c: &str| header.iter().position(|h| *h == c).unwrap();
    for row in &rows {
        assert_eq!(row[idx("seed")], "5");
        assert_eq!(row[idx("n")], "300");
        assert_eq!(row[idx("status")], "ok");
    }
}

#[test]
fn experiment_reruns_are_identical_apart_from_wall_time() {
    let run = || {
        let out = conetest(&[
            "experiment",
            "orthant-scaling",
            "--dims",
            "4,8",
            "--n",
            "200",
            "--format",
            "json",
        ]);
        assert!(out.status.success());
        let mut v = stdout_json(&out);
        v["metadata"]["wall_time_s"] = Value::Null;
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"experiment":"circular","dims":[4],"n":200,"seed":3,"format":"json"}"#,
    )
    .unwrap();
    let out = conetest(&[
        "experiment",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["metadata"]["config"]["seed"], 9);
    assert_eq!(v["metadata"]["config"]["n"], 200);
    assert_eq!(v["metadata"]["config"]["experiment"], "circular");
}

#[test]
fn geometry_and_lower_bound_subcommands() {
    let out = conetest(&[
        "geometry", "--cone", "orthant", "--dims", "16", "--n", "200",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("cone,d,width"));

    let out = conetest(&[
        "lower-bound",
        "--prior",
        "orthant-sparse",
        "--dims",
        "16",
        "--n",
        "200",
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_exit_2_with_a_record() {
    let cases: [(&[&str], Option<&str>); 6] = [
        (
            &["experiment", "circular", "--dims", "8", "--rho", "0.7"],
            Some("rho"),
        ),
        (&["experiment", "--dims", "8"], Some("experiment")),
        (
            &["experiment", "no-such-thing", "--dims", "8"],
            Some("experiment"),
        ),
        (&["radius", "--dims", "8,4"], Some("dims[1]")),
        (
            &["project", "--cone", "orthant", "--x", "1,NaN"],
            Some("x[1]"),
        ),
        (
            &["radius", "--dims", "8", "--config", "/nonexistent/cfg.json"],
            Some("config"),
        ),
    ];
    for (args, field) in cases {
        let out = conetest(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let rec = stderr_record(&out);
        assert_eq!(rec["error"]["kind"], "config", "{args:?}");
        assert_eq!(rec["error"]["field"].as_str(), field, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_2_with_a_record() {
    let out = conetest(&["radius", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"]["kind"], "usage");
}

#[test]
fn numerical_failures_exit_3() {
    let doc = r#"{"kind":"induced","dim":3,"params":{
        "inner":{"kind":"subspace","dim":3,"params":{"basis":[[0.5773502691896258],[0.5773502691896258],[0.5773502691896258]]}},
        "outer":{"kind":"monotone","dim":3,"params":{}}}}"#;
    let out = conetest(&["project", "--cone-json", doc, "--x", "1,2,3"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_record(&out)["error"]["kind"], "numerical");
}
