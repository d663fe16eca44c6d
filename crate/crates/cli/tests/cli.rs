use std::fs;
use std::process::{Command, Output};

const QUICK: [&str; 8] = ["--n-dir", "8", "--n-polar", "64", "--n-azimuth", "32", "--n-phi", "128"];

fn nlcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlcurv")).args(args).output().expect("binary runs")
}

fn curvature(args: &[&str]) -> Output {
    let mut all = vec!["curvature", "--reproducible"];
    all.extend_from_slice(args);
    all.extend_from_slice(&QUICK);
    nlcurv(&all)
}

fn rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice()).records().map(|r| r.unwrap()).collect()
}

fn column(out: &Output, name: &str) -> usize {
    let mut rd = csv::Reader::from_reader(out.stdout.as_slice());
    rd.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn value(row: &csv::StringRecord, i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn sphere_directional_curvature_matches_closed_form() {
    let out = curvature(&["--scene", "sphere:r=0.5", "--sigma", "0.5", "--point", "0.5,0,0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let k = column(&out, "k_sigma_e");
    let kind = column(&out, "kind");
    let dirs: Vec<_> = rows(&out).into_iter().filter(|r| &r[kind] == "direction").collect();
    assert_eq!(dirs.len(), 8);
    for r in &dirs {
        assert!((value(r, k) + 8.0).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn plane_row_is_zero() {
    let out = curvature(&["--scene", "plane", "--point", "0.3,-0.2,0.1"]);
    assert!(out.status.success());
    let rows = rows(&out);
    let point = rows.iter().find(|r| r.iter().any(|c| c == "point")).unwrap();
    for name in ["H_vol", "H_avg", "L_angular_11", "L_angular_12", "L_fullspace_22", "K_sigma"] {
        assert_eq!(value(point, column(&out, name)), 0.0, "{name}");
    }
}

#[test]
fn numbers_use_sixteen_digit_scientific_format() {
    let out = curvature(&["--scene", "sphere:r=0.5", "--point", "0.5,0,0"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("5.0000000000000000e-1"), "{text}");
}

#[test]
fn sweep_with_extrapolation_adds_a_limit_row() {
    let out = curvature(&[
        "--scene", "sphere:r=0.5", "--sweep-sigma", "0.9,0.95,0.99", "--extrapolate", "--point", "0.5,0,0", "--rep", "angular",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kind = column(&out, "kind");
    let limit: Vec<_> = rows(&out).into_iter().filter(|r| &r[kind] == "limit").collect();
    assert_eq!(limit.len(), 1);
    let r = &limit[0];
    assert_eq!(value(r, column(&out, "sigma")), 1.0);
    for name in ["k_sigma_e", "H_vol", "L_angular_11", "L_angular_22"] {
        let v = value(r, column(&out, name));
        assert!((v + 2.0).abs() < 0.04, "{name} = {v}");
    }
}

#[test]
fn failed_points_are_recorded_and_the_run_finishes() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("tet.off");
    fs::write(&mesh, "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n").unwrap();
    let report = dir.path().join("out.csv");
    let scene = format!("mesh:{}", mesh.display());
    let out = curvature(&[
        "--scene", &scene, "--rep", "surface", "--point", "0.3,0.3,0", "--point", "0.2,0.2,0.6", "-o", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = fs::read_to_string(&report).unwrap();
    let errors = text.lines().filter(|l| l.contains(",error,")).count();
    assert_eq!(errors, 2, "{text}");
    // The angular representation still works on the same mesh.
    assert!(curvature(&["--scene", &scene, "--rep", "angular", "--point", "0.3,0.3,0"]).status.success());
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(curvature(&["--scene", "cube"]).status.code(), Some(2));
    assert_eq!(curvature(&["--sigma", "1.5"]).status.code(), Some(2));
    assert_eq!(curvature(&["--scene", "sphere", "--rep", "surface"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"sigmas\": [0.5],\n  \"colour\": 1\n}\n").unwrap();
    let out = nlcurv(&["curvature", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("colour"), "{err}");
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_nlcurv")).args(["verify", "specfun"]).env("NLCURV_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_thread_run_matches_default() {
    let args = ["curvature", "--reproducible", "--scene", "torus", "--grid-on-surface", "3"];
    let run = |threads: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_nlcurv"));
        c.args(args).args(QUICK);
        if let Some(t) = threads {
            c.env("NLCURV_THREADS", t);
        }
        let out = c.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    assert_eq!(run(Some("1")), run(None));
}

#[test]
fn reproducible_output_is_byte_identical() {
    let args = ["--scene", "sphere:r=2", "--format", "json", "--point", "0,0,2"];
    let a = curvature(&args);
    let b = curvature(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("generated_unix"));
    let stamped = nlcurv(&["curvature", "--scene", "sphere:r=2", "--point", "0,0,2", "--n-dir", "8", "--n-polar", "64", "--n-azimuth", "32"]);
    assert!(String::from_utf8_lossy(&stamped.stdout).starts_with("# nlcurv"));
}

#[test]
fn printed_config_round_trips_and_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"scene": "torus:R=3,r=1", "sigmas": [0.25, 0.75], "quadrature": {"n_dir": 16}}"#).unwrap();
    let out = nlcurv(&["curvature", "--config", cfg.to_str().unwrap(), "--sigma", "0.4", "--print-config"]);
    assert!(out.status.success());
    let printed: nlcurv_cli::RunConfig = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed.scene, "torus:R=3,r=1");
    assert_eq!(printed.sigmas, vec![0.4]);
    assert_eq!(printed.quadrature.n_dir, 16);
    let again = dir.path().join("again.json");
    fs::write(&again, &out.stdout).unwrap();
    let out2 = nlcurv(&["curvature", "--config", again.to_str().unwrap(), "--print-config"]);
    assert_eq!(out.stdout, out2.stdout);
}

#[test]
fn verify_emits_a_json_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verdict.json");
    let out = nlcurv(&["verify", "specfun", "--reproducible", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["suite"], "specfun");
    assert!(String::from_utf8_lossy(&out.stderr).contains("[PASS]"));
}

#[test]
fn sphere_table_lists_every_combination() {
    let out = nlcurv(&["sphere-table", "--reproducible"]);
    assert!(out.status.success());
    assert_eq!(rows(&out).len(), 2 * 3 * 3);
    let k = column(&out, "k_sigma");
    let r = rows(&out).into_iter().find(|r| &r[0] == "3" && value(r, 1) == 0.5 && value(r, 2) == 0.5).unwrap();
    assert!((value(&r, k) + 8.0).abs() < 1e-12);
}

#[test]
fn fracops_writes_fields_and_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlcurv(&[
        "fracops", "--reproducible", "--nodes", "32", "--length", "8", "--op", "laplacian:0.5", "--op", "div-grad:0.3,0.5",
        "--out-dir", dir.path().to_str().unwrap(), "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(files.iter().filter(|f| f.ends_with(".bin")).count() >= 2, "{files:?}");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("rel_l2"), "{v}");
}

#[test]
fn perimeter_reports_area_and_scaling() {
    let out = nlcurv(&["perimeter", "--reproducible", "--dim", "2", "--sigma", "0.3", "--samples", "200000", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["rows"][0];
    assert!(row["area_z"].as_f64().unwrap() < 4.0, "{row}");
    assert!(row.get("warning").is_none());
}
