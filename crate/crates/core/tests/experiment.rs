use conetest::experiment::{
    run_experiment, validate_config, ExperimentName, ExperimentReport, OutputFormat,
};
use serde_json::{json, Value};

fn run(doc: Value) -> ExperimentReport {
    run_experiment(&validate_config(&doc).unwrap()).unwrap()
}

#[test]
fn orthant_scaling_has_the_documented_columns() {
    let r = run(json!({"experiment": "orthant-scaling", "dims": [16, 64, 256], "n": 1000}));
    assert_eq!(r.rows.len(), 3);
    for c in [
        "d",
        "radius_sq",
        "bracket_lo",
        "bracket_hi",
        "radius_sq_over_sqrt_d",
        "seed",
        "n",
        "status",
    ] {
        assert!(r.columns.iter().any(|x| x == c), "missing {c}");
    }
    for i in 0..3 {
        assert_eq!(r.get(i, "status"), Some(&json!("ok")));
        let (lo, hi, mid) = (
            r.get(i, "bracket_lo").unwrap().as_f64().unwrap(),
            r.get(i, "bracket_hi").unwrap().as_f64().unwrap(),
            r.get(i, "radius_sq").unwrap().as_f64().unwrap(),
        );
        assert!(lo <= mid && mid <= hi);
    }
}

#[test]
fn product_suboptimality_columns_and_growth() {
    let r = run(json!({"experiment": "product-suboptimality", "dims": [64, 1024], "n": 1500}));
    for c in ["d", "glr_radius_sq", "trunc_radius_sq", "ratio"] {
        assert!(r.columns.iter().any(|x| x == c), "missing {c}");
    }
    let ratio = r.column_f64("ratio");
    assert!(ratio[1].unwrap() > ratio[0].unwrap(), "{ratio:?}");
}

#[test]
fn geometry_report_for_the_monotone_cone() {
    let r = run(
        json!({"experiment": "geometry-report", "cone": "monotone", "dims": [1024], "n": 2000, "format": "json"}),
    );
    assert_eq!(r.summaries.len(), 1);
    let s = &r.summaries[0];
    assert_eq!(s["delta_lr_sq"], s["width"]["mean"]);
    assert_eq!(s["lr_second_term"], Value::Null);
    assert_eq!(r.get(0, "lr_second_term"), Some(&Value::Null));
}

#[test]
fn every_experiment_runs_and_replays_bit_identically() {
    for name in ExperimentName::ALL {
        let dims = match name {
            ExperimentName::SubspaceScaling => json!([2, 4]),
            ExperimentName::LowerBounds => json!([64, 256]),
            _ => json!([8, 16]),
        };
        let doc = json!({"experiment": name.as_str(), "dims": dims, "n": 300, "seed": 11});
        let a = run(doc.clone());
        let b = run(doc);
        assert!(!a.rows.is_empty(), "{name}");
        assert_eq!(a.columns, b.columns, "{name}");
        assert_eq!(a.rows, b.rows, "{name}");
        let (sa, sb) = (
            serde_json::to_string(&a.rows).unwrap(),
            serde_json::to_string(&b.rows).unwrap(),
        );
        assert_eq!(sa, sb);
        for (i, _) in a.rows.iter().enumerate() {
            assert_eq!(a.get(i, "seed"), Some(&json!(11)), "{name}");
            assert_eq!(a.get(i, "n"), Some(&json!(300)), "{name}");
        }
        assert_eq!(a.metadata["config"]["experiment"], json!(name.as_str()));
    }
}

#[test]
fn numerical_failures_surface_in_the_status_column() {
    // The orthant prior needs s <= d/2, which fails at d = 1.
    let r = run(json!({"experiment": "lower-bounds", "dims": [1, 16], "n": 100}));
    for i in 0..r.rows.len() {
        let d = r.get(i, "d").unwrap().as_u64().unwrap();
        let prior = r.get(i, "prior").unwrap();
        let status = r.get(i, "status").unwrap();
        let expect_ok = d == 16 || prior == "monotone-fg";
        assert_eq!(expect_ok, status == "ok", "row {i}: {prior} {status}");
    }
}

#[test]
fn csv_and_json_writers() {
    let r = run(json!({"experiment": "concentration", "dims": [8], "n": 200}));
    let mut csv = Vec::new();
    r.write(OutputFormat::Csv, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), r.columns.len());
    assert_eq!(lines.count(), r.rows.len());

    let mut js = Vec::new();
    r.write(OutputFormat::Json, &mut js).unwrap();
    let back: ExperimentReport = serde_json::from_slice(&js).unwrap();
    assert_eq!(back.rows, r.rows);
    assert_eq!(back.columns, r.columns);
}

#[test]
fn config_rejections() {
    let bad = [
        (json!({"dims": [4]}), "experiment"),
        (json!({"experiment": "nope", "dims": [4]}), "experiment"),
        (
            json!({"experiment": "circular", "dims": [4], "sigma": -1.0}),
            "sigma",
        ),
        (
            json!({"experiment": "circular", "dims": [4], "alpha": 2.0}),
            "alpha",
        ),
        (
            json!({"experiment": "circular", "dims": [4], "format": "xml"}),
            "format",
        ),
        (json!({"experiment": "circular", "dims": [0]}), "dims[0]"),
        (json!({"experiment": "circular", "dims": [4], "n": 1}), "n"),
        (
            json!({"experiment": "geometry-report", "dims": [4], "cone": "cube"}),
            "cone",
        ),
        (json!([1, 2]), "$"),
    ];
    for (doc, field) in bad {
        let e = validate_config(&doc).unwrap_err();
        assert!(e.to_string().starts_with(&format!("{field}:")), "{e}");
    }
}
