use std::path::Path;
use std::process::{Command, Output};

use mingraph::jobs::rotation_pair;
use mingraph_core::graph::{embed, AnsatzPoint};
use mingraph_core::ClosedFormGeodesic;
use serde_json::Value;

fn mingraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mingraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

const ROTATION: [&str; 8] = [
    "--n",
    "3",
    "--m",
    "2",
    "--lambdas",
    "1/2,1/2",
    "--b",
    "0,1,-1,0",
];

#[test]
fn rotation_example_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mingraph(&[
        "example",
        "--which",
        "rotation",
        "--quiet",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let r = &report(dir.path())["result"]["example"][0];
    assert_eq!(r["which"], "rotation");
    assert_eq!(r["points"], 100);
    assert!(r["max_mss_residual"].as_f64().unwrap() < 1e-10);
    assert!(r["max_closed_form_error"].as_f64().unwrap() < 1e-12);
    assert!(r["max_fd_oracle_gap"].as_f64().unwrap() < 1e-5);
    assert_eq!(r["positivity"]["verdict"], "entire-certified");
}

#[test]
fn tan_example_reports_blow_up_and_violation() {
    let out = mingraph(&["example", "--which", "tan"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["result"]["example"][0];
    let detected = r["detected_blow_up"].as_f64().unwrap();
    assert!((detected - std::f64::consts::FRAC_PI_2).abs() < 1e-2);
    assert_eq!(r["positivity"]["verdict"], "violation-found");
}

#[test]
fn entire_check_exit_codes() {
    let out = mingraph(&[&["entire-check"][..], &ROTATION].concat());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["result"]["entire-check"];
    assert!((r["min_det"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["verdict"], "entire-certified");

    let out = mingraph(&[
        "entire-check",
        "--n",
        "3",
        "--m",
        "2",
        "--lambdas",
        "1",
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(5));

    let out = mingraph(&[
        "entire-check",
        "--block",
        "1/2:0.3:1.1",
        "--block",
        "3/2:-1:0.5",
        "--n",
        "5",
        "--m",
        "4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn breakdown_and_blow_up_exit_codes() {
    let out = mingraph(&[
        "solve",
        "--n",
        "3",
        "--m",
        "2",
        "--lambdas",
        "1/2",
        "--t-samples",
        "3",
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = mingraph(&[
        "integrate",
        "--n",
        "3",
        "--m",
        "2",
        "--lambdas",
        "1",
        "--t-range",
        "0,3",
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let out = mingraph(&[
        "integrate",
        "--ambient",
        "lorentzian",
        "--n",
        "3",
        "--m",
        "2",
        "--lambdas",
        "1",
        "--t-range",
        "0,5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_are_line_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(
        &path,
        "{\n  \"schema_version\": 1,\n  \"mode\": \"solve\",\n  \"n\": 3,\n  \"colour\": 1\n}\n",
    )
    .unwrap();
    let out = mingraph(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("job.json:5:"), "{err}");
    assert!(err.contains("colour"), "{err}");

    let out = mingraph(&["solve", "--n", "3", "--m", "2", "--b", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field `b`"));

    let out = mingraph(&["export", "--n", "3", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "mode": "solve", "n": 3, "m": 2, "lambdas": ["1/2", "1/2"], "b": [0, 1, -1, 0], "t_samples": 5}"#,
    )
    .unwrap();
    let out = mingraph(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["solve"]["samples"].as_array().unwrap().len(), 5);

    let out = mingraph(&[
        "--config",
        path.to_str().unwrap(),
        "verify",
        "--points",
        "7",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["mode"], "verify");
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["result"]["verify"]["points"], 7);
}

#[test]
fn export_counts_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        &["--out", d, "--quiet", "export"][..],
        &ROTATION,
        &[
            "--x-samples",
            "32",
            "--t-samples",
            "32",
            "--t-range",
            "0,6.283185307179586",
            "--projection",
            "x1,x2,y1",
        ],
    ]
    .concat();
    let out = mingraph(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(report(dir.path())["result"]["export"]["vertices"], 32768);

    let obj = std::fs::read_to_string(dir.path().join("points.obj")).unwrap();
    assert_eq!(obj.lines().count(), 32768);
    assert!(obj
        .lines()
        .all(|l| l.starts_with("v ") && l.split(' ').count() == 4));

    let (spec, b) = rotation_pair();
    let g = ClosedFormGeodesic::build(spec, b).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("points.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x1", "x2", "t", "y1", "y2"]);
    let mut rows = 0;
    for rec in rdr.records() {
        let vals: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        let p = AnsatzPoint::new(vals[..2].to_vec(), vals[2]);
        assert_eq!(embed(&g.eval(p.t).unwrap(), &p).unwrap(), vals);
        rows += 1;
    }
    assert_eq!(rows, 32768);
}

#[test]
fn faces_cover_each_x1_slice() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        &["--out", d, "--quiet", "export"][..],
        &ROTATION,
        &[
            "--x-samples",
            "3",
            "--t-samples",
            "4",
            "--projection",
            "x2,t,y2",
            "--faces",
        ],
    ]
    .concat();
    assert_eq!(mingraph(&args).status.code(), Some(0));
    let obj = std::fs::read_to_string(dir.path().join("points.obj")).unwrap();
    let faces: Vec<&str> = obj.lines().filter(|l| l.starts_with("f ")).collect();
    assert_eq!(faces.len(), 3 * 2 * 3);
    assert_eq!(faces[0], "f 1 5 6 2");
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 36);
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let out = mingraph(
            &[
                &["--out", d, "--seed", seed, "--quiet", "verify"][..],
                &ROTATION,
            ]
            .concat(),
        );
        assert_eq!(out.status.code(), Some(0));
        let out = mingraph(
            &[
                &["--out", d, "--seed", seed, "--quiet", "export"][..],
                &ROTATION,
            ]
            .concat(),
        );
        assert_eq!(out.status.code(), Some(0));
        (
            std::fs::read(dir.path().join("report.json")).unwrap(),
            std::fs::read(dir.path().join("points.csv")).unwrap(),
        )
    };
    let verify_report = |seed: &str| {
        let out = mingraph(&[&["--seed", seed, "verify"][..], &ROTATION].concat());
        out.stdout
    };
    assert_eq!(run("5"), run("5"));
    assert_eq!(verify_report("5"), verify_report("5"));
    assert_ne!(verify_report("5"), verify_report("6"));
}
