use std::fs;
use std::path::Path;
use std::process::Command;

use almost_complex::cli::{self, run_with};

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|c| c.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

const DIAG_2: &str = r#"{"dim": 2, "points": [
    {"id": 0, "weight": 1.0, "J": [[0, -1], [1, 0]], "K": [[0.8, 0], [0, -0.8]]},
    {"id": 1, "weight": 0.5, "J": [[0, -1], [1, 0]], "K": [[0.8, 0], [0, -0.8]]}]}"#;

#[test]
fn odd_dimension_is_a_usage_error() {
    assert_eq!(run_with(["acs", "verify", "--dim", "3"], None), 2);
    assert_eq!(run_with(["acs", "verify", "--bogus"], None), 2);
    assert_eq!(run_with(["acs", "frobnicate"], None), 2);
}

#[test]
fn corrupted_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = write(dir.path(), "bad.json", "{ \"dim\": 2, \"points\": [");
    assert_eq!(
        run_with(["acs", "verify", "--trials", "1", "--in", &garbage], None),
        2
    );
    let not_acs = write(
        dir.path(),
        "notacs.json",
        r#"{"dim": 2, "points": [{"id": 4, "weight": 1, "J": [[0, -2], [1, 0]]}]}"#,
    );
    assert_eq!(
        run_with(["acs", "verify", "--trials", "1", "--in", &not_acs], None),
        2
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run_with(["acs", "verify", "--in", missing.to_str().unwrap()], None),
        2
    );
}

#[test]
fn failing_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = run_with(
        [
            "acs",
            "verify",
            "--trials",
            "2",
            "--points",
            "2",
            "--tol-theorem1",
            "1e-30",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(status, 1);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let t1 = report["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "theorem1")
        .unwrap();
    assert_eq!(t1["tolerance"], 1e-30);
    assert_eq!(t1["passed"], false);
}

#[test]
fn valid_input_is_checked_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", DIAG_2);
    let out = dir.path().join("r.json");
    let status = run_with(
        [
            "acs",
            "verify",
            "--trials",
            "2",
            "--points",
            "2",
            "--in",
            &input,
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(status, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"input_acs\""));
    assert!(text.contains("point 1"));
}

#[test]
fn geodesic_trace_matches_scalar_tanh() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", DIAG_2);
    let out = dir.path().join("g.csv");
    let status = run_with(
        [
            "acs",
            "geodesic",
            "--in",
            &input,
            "--t-max",
            "2",
            "--t-steps",
            "8",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(status, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,k_norm,acs_residual,geodesic_residual,associated,orthogonal\n"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 9);
    assert_eq!(&rows[0][..4], &[0.0, 0.0, 0.0, 0.0]);
    for r in &rows {
        let t = r[0];
        assert!((r[1] - (0.4 * t).tanh()).abs() < 1e-14, "t={t}");
        assert!(r[2] <= 1e-10);
        assert!(r[3] <= 1e-6);
        // symmetric direction: stays associated; the nonzero diagonal one
        // leaves the orthogonal structures
        assert_eq!(r[4], 1.0);
        assert_eq!(r[5], if t == 0.0 { 1.0 } else { 0.0 });
    }
}

#[test]
fn csv_numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    assert_eq!(
        run_with(
            [
                "acs",
                "geodesic",
                "--points",
                "3",
                "--out",
                out.to_str().unwrap()
            ],
            None
        ),
        0
    );
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',').take(4) {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(almost_complex::format::fmt17(x), cell);
        }
    }
}

#[test]
fn project_splits_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, doc: &str| -> Vec<String> {
        let input = write(dir.path(), name, doc);
        let out = dir.path().join(format!("{name}.csv"));
        assert_eq!(
            run_with(
                [
                    "acs",
                    "project",
                    "--in",
                    &input,
                    "--out",
                    out.to_str().unwrap()
                ],
                None
            ),
            0
        );
        fs::read_to_string(&out)
            .unwrap()
            .lines()
            .skip(1)
            .map(str::to_string)
            .collect()
    };

    for line in run("two.json", DIAG_2) {
        let c: Vec<&str> = line.split(',').collect();
        assert_eq!(c[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(c[3], "symmetric");
    }

    // J0 = standard, K skew and anticommuting in dimension 4
    let skew = r#"{"dim": 4, "points": [{"id": 2, "weight": 1,
        "J": [[0,-1,0,0],[1,0,0,0],[0,0,0,-1],[0,0,1,0]],
        "K": [[0,0,1,0],[0,0,0,-1],[-1,0,0,0],[0,1,0,0]]}]}"#;
    let c: Vec<String> = run("skew.json", skew)[0]
        .split(',')
        .map(str::to_string)
        .collect();
    assert_eq!(c[0], "2");
    assert_eq!(c[1].parse::<f64>().unwrap(), 0.0);
    assert!(c[2].parse::<f64>().unwrap() > 0.0);
    assert_eq!(c[3], "antisymmetric");

    let mixed = r#"{"dim": 4, "points": [{"id": 0, "weight": 1,
        "J": [[0,-1,0,0],[1,0,0,0],[0,0,0,-1],[0,0,1,0]],
        "K": [[0,0,1,0],[0,0,0,-1],[0,0,0,0],[0,0,0,0]]}]}"#;
    let c: Vec<String> = run("mixed.json", mixed)[0]
        .split(',')
        .map(str::to_string)
        .collect();
    assert!(c[1].parse::<f64>().unwrap() > 0.0);
    assert!(c[2].parse::<f64>().unwrap() > 0.0);
    assert_eq!(c[3], "mixed");

    let bad = r#"{"dim": 2, "points": [{"id": 0, "weight": 1, "J": [[0,-1],[1,0]], "K": [[1,0],[0,1]]}]}"#;
    let input = write(dir.path(), "bad.json", bad);
    assert_eq!(run_with(["acs", "project", "--in", &input], None), 2);
    assert_eq!(run_with(["acs", "project"], None), 2);
}

#[test]
fn curvature_and_signature_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let status = run_with(
        [
            "acs",
            "curvature",
            "--dim",
            "2,4",
            "--trials",
            "3",
            "--points",
            "2",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(status, 0);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 6);

    let out = dir.path().join("s.csv");
    assert_eq!(
        run_with(
            [
                "acs",
                "signature",
                "--dim",
                "2,4",
                "--out",
                out.to_str().unwrap()
            ],
            None
        ),
        0
    );
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains(",antisymmetric,0,"));
    assert!(text.contains(",indefinite"));
    let out = dir.path().join("s.json");
    assert_eq!(
        run_with(
            [
                "acs",
                "signature",
                "--format",
                "report",
                "--out",
                out.to_str().unwrap()
            ],
            None
        ),
        0
    );
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["passed"] == true));
}

#[test]
fn out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run_with(["acs", "geodesic", "--points", "2"], Some(dir.path())),
        0
    );
    assert!(dir.path().join("geodesic.csv").exists());
    assert_eq!(
        run_with(
            ["acs", "geodesic", "--points", "2", "--out", "sub/trace.csv"],
            Some(dir.path())
        ),
        0
    );
    assert!(dir.path().join("sub/trace.csv").exists());
}

#[test]
fn binary_honours_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_acs"))
        .args(["verify", "--trials", "2", "--points", "2", "--dim", "2,4"])
        .env(cli::OUT_DIR_VAR, dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 0);

    let status = Command::new(env!("CARGO_BIN_EXE_acs"))
        .args(["verify", "--dim", "3"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["geodesic", "curvature", "signature"] {
        let mut texts = Vec::new();
        for i in 0..2 {
            let out = dir.path().join(format!("{cmd}{i}.csv"));
            run_with(
                [
                    "acs",
                    cmd,
                    "--seed",
                    "11",
                    "--trials",
                    "2",
                    "--out",
                    out.to_str().unwrap(),
                ],
                None,
            );
            texts.push(fs::read(&out).unwrap());
        }
        assert_eq!(texts[0], texts[1], "{cmd}");
    }
}
