use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn surfq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a table, without provenance comments and the column header.
fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split(',').map(|f| f.parse::<f64>().ok()).collect::<Option<Vec<f64>>>())
        .collect()
}

fn json_run(args: &[&str]) -> (Output, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut full = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--out", p]);
    let out = surfq(&full);
    let text = fs::read_to_string(&path).unwrap_or_else(|_| panic!("no report; stderr: {}", String::from_utf8_lossy(&out.stderr)));
    (out, serde_json::from_str(&text).unwrap())
}

const VG: usize = 10;
const K: usize = 9;

#[test]
fn sphere_curvature_table() {
    let out = surfq(&["curvature", "--surface", "sphere", "--radius", "1", "--grid", "16x32"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 512);
    assert!(rows.iter().all(|r| r.len() == 11 && r[VG] == 0.0));
}

#[test]
fn cylinder_potential_column() {
    let out = surfq(&["curvature", "--surface", "cylinder", "--radius", "2", "--grid", "8x8"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 64);
    for r in rows {
        assert!((r[VG] + 1.0 / 32.0).abs() <= 1e-15, "{}", r[VG]);
    }
}

#[test]
fn torus_gaussian_curvature_changes_sign() {
    let (big, small) = (2.0, 0.5);
    let out = surfq(&["curvature", "--surface", "torus", "--R", "2", "--r", "0.5", "--grid", "64x64"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 64 * 64);
    let (mut outer, mut inner) = (0, 0);
    for r in &rows {
        let v = r[1];
        let expected = v.cos() / (small * (big + small * v.cos()));
        assert!((r[K] - expected).abs() <= 1e-10, "v = {v}: {} vs {expected}", r[K]);
        if v < std::f64::consts::FRAC_PI_2 - 1e-9 {
            assert!(r[K] > 0.0);
            outer += 1;
        } else if v > std::f64::consts::FRAC_PI_2 + 1e-9 && v < 3.0 * std::f64::consts::FRAC_PI_2 - 1e-9 {
            assert!(r[K] < 0.0);
            inner += 1;
        }
    }
    assert!(outer > 0 && inner > 0);
}

#[test]
fn brackets_pass_on_sphere() {
    let (out, report) = json_run(&["brackets", "--surface", "sphere", "--samples", "1000", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for id in ["EQ3", "EQ4", "EQ5", "EQ6", "EQ7", "EQ8", "EQ9", "NT0", "CMAT"] {
        let line = text.lines().find(|l| l.starts_with(id)).unwrap();
        assert!(line.contains("1000") && line.ends_with("PASS"), "{line}");
        assert_eq!(report["identities"][id]["pass"], Value::Bool(true));
        assert_eq!(report["identities"][id]["samples"], 1000);
    }
    assert_eq!(report["provenance"]["seed"], 1);
    assert_eq!(report["provenance"]["tolerance"], 1e-8);
    assert_eq!(report["provenance"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn brackets_below_rounding_floor_fail() {
    let out = surfq(&["brackets", "--surface", "sphere", "--samples", "1000", "--tol", "1e-16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn identical_seeds_give_identical_reports() {
    let args = ["brackets", "--surface", "torus", "--samples", "300", "--seed", "42", "--format", "json"];
    let a = surfq(&args);
    let b = surfq(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = surfq(&["brackets", "--surface", "torus", "--samples", "300", "--seed", "43", "--format", "json"]);
    assert_ne!(a.stdout, c.stdout);

    let args = ["spectrum", "--surface", "torus", "--k", "4", "--grid", "24x24", "--format", "json"];
    assert_eq!(surfq(&args).stdout, surfq(&args).stdout);
}

fn eigenvalues(args: &[&str]) -> Vec<f64> {
    let out = surfq(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    data_rows(&stdout(&out)).iter().map(|r| r[1]).collect()
}

#[test]
fn sphere_spectrum() {
    let values = eigenvalues(&["spectrum", "--surface", "sphere", "--k", "9", "--grid", "64x128"]);
    let exact = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0].map(|x: f64| x / 2.0);
    assert_eq!(values.len(), 9);
    assert!(values[0].abs() <= 1e-8);
    for (v, e) in values.iter().zip(exact).skip(1) {
        assert!(((v - e) / e).abs() <= 5e-3, "{v} vs {e}");
    }
}

#[test]
fn sphere_spectrum_ignores_geometric_potential() {
    let base = ["spectrum", "--surface", "sphere", "--k", "4", "--grid", "16x32"];
    let with = surfq(&base);
    let mut args = base.to_vec();
    args.push("--no-geometric-potential");
    let without = surfq(&args);
    let body = |o: &Output| stdout(o).lines().skip(1).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(body(&with), body(&without));
}

#[test]
fn torus_ground_state_lowered_by_potential() {
    let base = ["spectrum", "--surface", "torus", "--R", "2", "--r", "0.5", "--k", "4", "--grid", "32x32"];
    let with = eigenvalues(&base);
    let mut args = base.to_vec();
    args.push("--no-geometric-potential");
    let without = eigenvalues(&args);
    assert!(with[0] < without[0], "{} vs {}", with[0], without[0]);
}

fn report<'a>(json: &'a Value, id: &str) -> &'a Value {
    json["reports"].as_array().unwrap().iter().find(|r| r["identity"] == id).unwrap()
}

#[test]
fn torus_eq17_converges_with_potential() {
    let (out, json) = json_run(&[
        "verify-quantum", "--surface", "torus", "--R", "2", "--r", "0.5", "--grid", "32x32", "--grid", "64x64", "--grid",
        "128x128", "--identity", "EQ17",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&json, "EQ17");
    let order = r["order"].as_f64().unwrap();
    assert!((order - 2.0).abs() <= 0.5, "{order}");
    assert_eq!(r["status"], "PASS");
    assert_eq!(json["provenance"]["grids"], serde_json::json!([[32, 32], [64, 64], [128, 128]]));
}

#[test]
fn discriminator_flags_missing_potential() {
    let ladder = ["--grid", "32x32", "--grid", "64x64", "--grid", "128x128"];
    let mut args = vec!["verify-quantum", "--surface", "torus", "--center", "0.7,0.4,0.3", "--identity", "EQ17"];
    args.extend(ladder);
    args.push("--no-geometric-potential");
    let (plain, json) = json_run(&args);
    assert_eq!(plain.status.code(), Some(1));
    let r = report(&json, "EQ17");
    let floor = r["grids"][2]["residual"].as_f64().unwrap();
    assert!(floor > 1.0, "{floor}");
    assert_eq!(r["status"], "FAIL");

    args.push("--discriminator");
    let (out, json) = json_run(&args);
    assert_eq!(out.status.code(), Some(0));
    let d = &json["discriminators"][0];
    assert_eq!(d["identity"], "EQ17");
    assert_eq!(d["without_vg"]["status"], "VIOLATED-as-expected");
    assert_eq!(d["with_vg"]["status"], "PASS");
    assert!(d["ratio"].as_f64().unwrap() >= 10.0);
    assert!(stdout(&out).contains("VIOLATED-as-expected"));
}

#[test]
fn flat_chart_identities_exact() {
    let (out, json) = json_run(&["verify-quantum", "--surface", "plane"]);
    assert_eq!(out.status.code(), Some(0));
    for r in json["reports"].as_array().unwrap() {
        let id = r["identity"].as_str().unwrap();
        match id {
            "EQ13" | "EQ14" | "EQ17" => assert!(r["order"].is_null(), "{id}"),
            "PSQ" => {
                let order = r["order"].as_f64().unwrap();
                assert!((order - 2.0).abs() <= 0.5, "{order}");
            }
            _ => {
                assert_eq!(r["order"], "exact", "{id}");
                for g in r["grids"].as_array().unwrap() {
                    let residual = g["residual"].as_f64().unwrap();
                    let scale = g["scale"].as_f64().unwrap().max(1.0);
                    assert!(residual <= 1e-12 * scale, "{id}: {residual}");
                }
            }
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# cylinder run\nsurface = cylinder\nradius = 1\ngrid = 8x8\nhbar = 2\n").unwrap();
    let out = surfq(&["curvature", "--config", conf.to_str().unwrap(), "--radius", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&stdout(&out));
    // hbar = 2 from the file, R = 2 from the flag: V_G = -hbar^2/(8 R^2).
    assert!(rows.iter().all(|r| (r[VG] + 4.0 / 32.0).abs() <= 1e-15));
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["curvature", "--grid", "16"],
        &["curvature", "--surface", "cube"],
        &["curvature", "--surface", "sphere", "--R", "2"],
        &["curvature", "--radius", "-1"],
        &["curvature", "--radius", "nan"],
        &["spectrum", "--surface", "ellipsoid", "--grid", "8x8"],
        &["brackets", "--samples", "0"],
        &["brackets", "--tol", "-1"],
        &["brackets", "--hbar", "0"],
        &["spectrum", "--grid", "4x4", "--k", "50"],
        &["verify-quantum", "--grid", "8x8", "--grid", "16x16"],
        &["verify-quantum", "--grid", "16x16", "--grid", "8x8", "--grid", "32x32"],
        &["verify-quantum", "--identity", "EQ99"],
        &["verify-quantum", "--discriminator", "--identity", "EQ12"],
        &["curvature", "--config", "/nonexistent/surfq.conf"],
        &["frobnicate"],
        &[],
    ];
    for args in cases {
        let out = surfq(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"), "{args:?}");
    }
}

#[test]
fn non_convergence_exits_1() {
    let out = surfq(&["spectrum", "--surface", "torus", "--grid", "32x32", "--k", "4", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}
