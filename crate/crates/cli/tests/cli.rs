use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtnmap::Packing64;
use serde_json::Value;
use tempfile::TempDir;

fn dtnmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtnmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

/// Exit code and the parsed error JSON.
fn failure(o: &Output) -> (i32, Value) {
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).expect("error JSON on stderr");
    (o.status.code().unwrap(), err)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ring_fixture(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("ring.json");
    let o = dtnmap(&[
        "gen",
        "ring",
        "--n",
        "8",
        "--rho",
        "0.85",
        "--radius",
        "0.1",
        "--out",
        p(&path),
    ]);
    stdout(&o);
    path
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn gen_ring_is_the_standard_fixture() {
    let dir = TempDir::new().unwrap();
    let path = ring_fixture(&dir);
    let packing = Packing64::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(packing.len(), 8);
    assert_eq!(packing.domain_radius, 1.0);
    let first = packing.inclusions[0];
    assert_eq!((first.x, first.y, first.r), (0.85, 0.0, 0.1));
    for d in &packing.inclusions {
        assert!((d.x.hypot(d.y) - 0.85).abs() < 1e-15);
    }
}

#[test]
fn gen_overlapping_ring_is_infeasible() {
    let (code, err) = failure(&dtnmap(&[
        "gen", "ring", "--n", "8", "--rho", "0.85", "--radius", "0.4",
    ]));
    assert_eq!(code, 2);
    assert_eq!(err["kind"], "InfeasibleError");
}

#[test]
fn gen_random_is_deterministic() {
    let args = |seed: &'static str| {
        [
            "gen",
            "random",
            "--n",
            "12",
            "--r-min",
            "0.08",
            "--r-max",
            "0.08",
            "--delta-min",
            "0.01",
            "--seed",
            seed,
        ]
    };
    let a = stdout(&dtnmap(&args("7")));
    let b = stdout(&dtnmap(&args("7")));
    let c = stdout(&dtnmap(&args("8")));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(Packing64::from_json(&a).unwrap().len(), 12);
}

#[test]
fn gen_grid_keeps_uniform_gap() {
    let text = stdout(&dtnmap(&[
        "gen", "grid", "--radius", "0.1", "--delta", "0.01",
    ]));
    let packing = Packing64::from_json(&text).unwrap();
    assert!(packing.len() >= 7);
    let a = dtnmap::analyze_packing(packing).unwrap();
    assert!(a.all_gap_widths().iter().all(|&g| g >= 0.01 - 1e-12));
}

#[test]
fn packings_round_trip_byte_for_byte() {
    let text = stdout(&dtnmap(&[
        "gen",
        "random",
        "--n",
        "6",
        "--r-min",
        "0.05",
        "--r-max",
        "0.12",
        "--delta-min",
        "0.02",
        "--seed",
        "3",
    ]));
    let packing = Packing64::from_json(&text).unwrap();
    assert_eq!(format!("{}\n", packing.to_json()), text);
}

#[test]
fn analyze_constant_is_zero() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let report = json(&dtnmap(&[
        "analyze",
        "--packing",
        p(&ring),
        "--cos",
        "0=2.5",
    ]));
    for key in ["E_net", "E_ref", "R_res", "total", "quad_form"] {
        assert_eq!(report["breakdown"][key], 0.0, "{key}");
    }
}

#[test]
fn analyze_ring_cos3() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let report = json(&dtnmap(&["analyze", "--packing", p(&ring), "--cos", "3=1"]));
    let b = &report["breakdown"];
    assert!(b["E_net"].as_f64().unwrap() > 0.0);
    assert!((b["E_ref"].as_f64().unwrap() - 1.5 * PI).abs() < 1e-14);
    let total =
        b["E_net"].as_f64().unwrap() + b["E_ref"].as_f64().unwrap() + b["R_res"].as_f64().unwrap();
    assert!((b["total"].as_f64().unwrap() - total).abs() < 1e-14 * total);
    let excitation = report["excitation"].as_array().unwrap();
    assert_eq!(excitation.len(), 8);
    // Ψ_0 = cos(0) e^{-3√(2·0.1·0.05)}
    let psi0 = excitation[0]["psi"].as_f64().unwrap();
    assert!((psi0 - (-3.0 * 0.01f64.sqrt()).exp()).abs() < 1e-15);
    // neighbor gaps of 0.45 are not small against R = 0.1
    assert_eq!(
        report["scale_report"]["warnings"],
        serde_json::json!(["gaps_not_small"])
    );
}

#[test]
fn analyze_reports_scale_warnings() {
    let dir = TempDir::new().unwrap();
    let wide = write(
        &dir,
        "wide.json",
        r#"{"L": 1.0, "inclusions": [{"x": 0.0, "y": 0.0, "r": 0.5}]}"#,
    );
    let report = json(&dtnmap(&["analyze", "--packing", p(&wide), "--cos", "1=1"]));
    let warnings: Vec<&str> = report["scale_report"]["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap())
        .collect();
    assert!(warnings.contains(&"gaps_not_small"));
    assert!(warnings.contains(&"inclusions_not_small"));
    assert!(warnings.contains(&"centered_inclusion"));
}

#[test]
fn analyze_malformed_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"L\": 1.0, \"inclusions\": [");
    let (code, err) = failure(&dtnmap(&["analyze", "--packing", p(&bad), "--cos", "1=1"]));
    assert_eq!(code, 2);
    assert_eq!(err["kind"], "ParseError");
}

#[test]
fn analyze_rejects_mixed_radii_in_identical_mode() {
    let dir = TempDir::new().unwrap();
    let mixed = write(
        &dir,
        "mixed.json",
        r#"{"L": 1.0, "inclusions": [{"x": -0.5, "y": 0.0, "r": 0.1}, {"x": 0.5, "y": 0.0, "r": 0.2}]}"#,
    );
    let (code, err) = failure(&dtnmap(&[
        "analyze",
        "--packing",
        p(&mixed),
        "--cos",
        "1=1",
    ]));
    assert_eq!(code, 2);
    assert_eq!(err["kind"], "ModeError");
    let report = json(&dtnmap(&[
        "analyze",
        "--packing",
        p(&mixed),
        "--cos",
        "1=1",
        "--mode",
        "generalized",
    ]));
    assert!(report["breakdown"]["E_net"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_file_and_bad_flags_are_usage_errors() {
    let (code, err) = failure(&dtnmap(&[
        "analyze",
        "--packing",
        "/nonexistent.json",
        "--cos",
        "1=1",
    ]));
    assert_eq!((code, err["kind"].as_str().unwrap()), (2, "IoError"));
    let (code, err) = failure(&dtnmap(&[
        "analyze",
        "--packing",
        "x.json",
        "--cos",
        "one=1",
    ]));
    assert_eq!((code, err["kind"].as_str().unwrap()), (2, "UsageError"));
    let (code, _) = failure(&dtnmap(&["frobnicate"]));
    assert_eq!(code, 2);
}

#[test]
fn sweep_ring_fixture() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let args = [
        "sweep",
        "--packing",
        p(&ring),
        "--k-from",
        "1",
        "--k-to",
        "100",
    ];
    let text = stdout(&dtnmap(&args));
    assert_eq!(text, stdout(&dtnmap(&args)));
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        [
            "k",
            "epsilon",
            "eta",
            "regime",
            "E_net",
            "E_ref",
            "R_res",
            "total",
            "quad_form"
        ]
    );
    assert_eq!(rows.len(), 100);
    let ks: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ks, (1..=100).collect::<Vec<_>>());
    let regimes: Vec<u8> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(regimes[0], 1);
    assert_eq!(regimes[99], 2);
    assert!(regimes.windows(2).all(|w| w[0] <= w[1]), "{regimes:?}");
    for r in &rows {
        let k: f64 = r[0].parse().unwrap();
        let e_ref: f64 = r[5].parse().unwrap();
        assert_eq!(e_ref, k * PI / 2.0);
    }
}

#[test]
fn sweep_csv_matches_json_exactly() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let base = [
        "sweep",
        "--packing",
        p(&ring),
        "--k-from",
        "0",
        "--k-to",
        "12",
    ];
    let (_, rows) = parse_csv(&stdout(&dtnmap(&base)));
    let mut with_json = base.to_vec();
    with_json.extend(["--format", "json"]);
    let parsed = json(&dtnmap(&with_json));
    let parsed = parsed.as_array().unwrap();
    for (r, j) in rows.iter().zip(parsed) {
        for (c, key) in [(4, "E_net"), (6, "R_res"), (8, "quad_form")] {
            assert_eq!(r[c].parse::<f64>().unwrap(), j[key].as_f64().unwrap());
        }
    }
    // k = 0 is the constant mode
    for v in &rows[0][4..9] {
        assert_eq!(v.parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn sweep_empty_range_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let (code, _) = failure(&dtnmap(&[
        "sweep",
        "--packing",
        p(&ring),
        "--k-from",
        "5",
        "--k-to",
        "4",
    ]));
    assert_eq!(code, 2);
}

#[test]
fn dtn_matrix_is_a_symmetric_laplacian() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let report = json(&dtnmap(&["dtn", "--packing", p(&ring)]));
    let m: Vec<Vec<f64>> = serde_json::from_value(report["matrix"].clone()).unwrap();
    assert_eq!(m.len(), 8);
    for (i, row) in m.iter().enumerate() {
        assert!(row.iter().sum::<f64>().abs() < 1e-10);
        for (j, v) in row.iter().enumerate() {
            assert!((v - m[j][i]).abs() < 1e-12);
        }
    }
    assert_eq!(report["network"]["edges"].as_array().unwrap().len(), 8);
    assert_eq!(report["boundary"].as_array().unwrap().len(), 8);
    let (header, rows) = parse_csv(&stdout(&dtnmap(&[
        "dtn",
        "--packing",
        p(&ring),
        "--format",
        "csv",
    ])));
    assert_eq!(header.len(), 8);
    assert_eq!(rows[2][3].parse::<f64>().unwrap(), m[2][3]);
}

#[test]
fn delta_max_edge_cuts_the_ring() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let report = json(&dtnmap(&[
        "dtn",
        "--packing",
        p(&ring),
        "--delta-max-edge",
        "0.1",
    ]));
    assert!(report["network"]["edges"].as_array().unwrap().is_empty());
}

#[test]
fn validate_empty_domain_is_exact() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", r#"{"L": 1.0, "inclusions": []}"#);
    for k in ["1", "4", "9"] {
        let spec = format!("{k}=1");
        let report = json(&dtnmap(&[
            "validate",
            "--packing",
            p(&empty),
            "--cos",
            &spec,
        ]));
        let row = &report["rows"][0];
        let kpi = k.parse::<f64>().unwrap() * PI;
        assert!((row["asymptotic_quad_form"].as_f64().unwrap() - kpi).abs() < 1e-12 * kpi);
        assert!(row["relative_difference"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn validate_trend_over_gap_family() {
    let dir = TempDir::new().unwrap();
    let mut paths = Vec::new();
    for t in ["0.1", "0.05", "0.02"] {
        let path = dir.path().join(format!("ring-{t}.json"));
        stdout(&dtnmap(&[
            "gen",
            "equal-gap-ring",
            "--n",
            "16",
            "--ratio",
            t,
            "--out",
            p(&path),
        ]));
        paths.push(path);
    }
    let mut args = vec!["validate", "--cos", "1=1"];
    for path in &paths {
        args.extend(["--packing", p(path)]);
    }
    let report = json(&dtnmap(&args));
    assert_eq!(report["trend"].as_array().unwrap().len(), 3);
    assert_eq!(report["trend_decreasing"], true);
    for row in report["rows"].as_array().unwrap() {
        assert!(row["oracle_residual"].as_f64().unwrap() < 1e-4);
        assert_eq!(row["oracle_refused"], false);
    }
}

#[test]
fn validate_guard_violation_keeps_asymptotics() {
    let dir = TempDir::new().unwrap();
    let tight = dir.path().join("tight.json");
    stdout(&dtnmap(&[
        "gen",
        "ring",
        "--n",
        "8",
        "--rho",
        "0.89999",
        "--radius",
        "0.1",
        "--out",
        p(&tight),
    ]));
    let report = json(&dtnmap(&[
        "validate",
        "--packing",
        p(&tight),
        "--cos",
        "1=1",
    ]));
    let row = &report["rows"][0];
    assert_eq!(row["oracle_refused"], true);
    assert_eq!(row["oracle_error"]["kind"], "OracleRefusedError");
    assert!(row["asymptotic_quad_form"].as_f64().unwrap() > 0.0);
    assert!(row["oracle_quad_form"].is_null());
}

#[test]
fn validate_order_below_frequency_is_rejected() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let (code, err) = failure(&dtnmap(&[
        "validate",
        "--packing",
        p(&ring),
        "--cos",
        "5=1",
        "--oracle-m",
        "4",
    ]));
    assert_eq!(code, 2);
    assert_eq!(err["kind"], "UsageError");
}

#[test]
fn outputs_are_reproducible_files() {
    let dir = TempDir::new().unwrap();
    let ring = ring_fixture(&dir);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        stdout(&dtnmap(&[
            "analyze",
            "--packing",
            p(&ring),
            "--cos",
            "2=1",
            "--sin",
            "5=0.5",
            "--out",
            p(out),
        ]));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
