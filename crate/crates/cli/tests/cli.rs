use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use isosec::{run, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use isosec_core::sphere::SphericalGrid;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("isosec").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn dump(path: &Path, nt: usize, np: usize, f: impl Fn(&isosec_core::Vector) -> f64) {
    let grid = SphericalGrid::<f64>::new(nt, np).unwrap();
    let mut buf = Vec::new();
    grid.write_csv(&grid.sample(f), &mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn cosine_and_funk_of_constant() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    dump(&input, 16, 32, |_| 1.0);
    for which in ["cosine", "funk"] {
        let (code, out, err) = invoke(&["transform", which, "--input", input.to_str().unwrap()]);
        assert_eq!(code, EXIT_PASS, "{err}");
        let v = values(&out);
        assert_eq!(v.len(), 16 * 32);
        assert!(v.iter().all(|x| (x - 2.0 * PI).abs() < 1e-12), "{which}");
    }
}

#[test]
fn symmetrize_keeps_zonal_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zonal.csv");
    let output = dir.path().join("nested/sym.csv");
    dump(&input, 12, 24, |x| x.z().powi(3) + 0.5 * x.z());
    let (code, _, err) = invoke(&[
        "transform",
        "symmetrize",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let before = values(&fs::read_to_string(&input).unwrap());
    let after = values(&fs::read_to_string(&output).unwrap());
    for (a, b) in before.iter().zip(&after) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    dump(&input, 4, 8, |_| 1.0);
    let text = fs::read_to_string(&input).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = "1.0,2.0,oops,3.0";
    fs::write(&input, lines.join("\n")).unwrap();
    let (code, _, err) = invoke(&["transform", "cosine", "--input", input.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn off_grid_node_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("shifted.csv");
    dump(&input, 4, 8, |_| 1.0);
    let text = fs::read_to_string(&input).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut f: Vec<String> = lines[5].split(',').map(String::from).collect();
    f[1] = format!("{:.16e}", f[1].parse::<f64>().unwrap() + 1e-3);
    lines[5] = f.join(",");
    fs::write(&input, lines.join("\n")).unwrap();
    let (code, _, err) = invoke(&["transform", "funk", "--input", input.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 6"), "{err}");
}

#[test]
fn unknown_config_key_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "band = 8\ntol_newtn = 1e-9\n").unwrap();
    let (code, _, err) = invoke(&["--config", cfg.to_str().unwrap(), "verify", "--suite", "sr"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 2") && err.contains("tol_newtn"), "{err}");
}

#[test]
fn unknown_suite_is_input_error() {
    let (code, _, err) = invoke(&["verify", "--suite", "everything"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("everything"));
}

#[test]
fn overlapping_caps_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "u_center = 0, 0, 1\nv_center = 0, 0.2, -1\nu_height = 0.5\nv_height = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = invoke(&[
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "16,32",
        "--band",
        "8",
        "--out",
        out.to_str().unwrap(),
        "counterexample",
    ]);
    assert_eq!(code, EXIT_INPUT, "{err}");
    assert!(err.starts_with("error:"));
}

#[test]
fn coarse_counterexample_fails_with_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ce");
    let (code, stdout, err) = invoke(&[
        "--grid",
        "16,32",
        "--band",
        "8",
        "--out",
        out.to_str().unwrap(),
        "counterexample",
    ]);
    assert_eq!(code, EXIT_FAIL, "{err}");
    assert!(stdout.contains("FAIL") && stdout.contains("budget"));
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["band"], 8);
    let (ru, rv) = (diag["radius_U"].as_f64().unwrap(), diag["radius_V"].as_f64().unwrap());
    assert!((rv - ru - 1.0).abs() < 1e-12);
    for f in ["g.csv", "g_coeffs.csv", "w.csv", "w_coeffs.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn sr_suite_has_the_four_pi_row_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let args = [
        "--grid",
        "24,48",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
        "verify",
        "--suite",
        "sr",
    ];
    let (code, first, err) = invoke(&args);
    assert_eq!(code, EXIT_PASS, "{err}");
    let (_, second, _) = invoke(&args);
    assert_eq!(first, second);
    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    let rows = report["results"].as_array().unwrap();
    let four_pi = rows
        .iter()
        .find(|r| r["test_id"] == "sr.identity_constant_4pi")
        .unwrap();
    assert_eq!(four_pi["pass"], true);
    assert!(rows
        .iter()
        .all(|r| r["paper_anchor"].as_str().is_some_and(|a| !a.is_empty())));
    assert_eq!(report["config_echo"]["seed"], "7");
    assert_eq!(fs::read_to_string(out.join("report-sr.json")).unwrap(), first);
}

#[test]
fn newton_suite_on_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = invoke(&[
        "--grid",
        "16,32",
        "--out",
        dir.path().to_str().unwrap(),
        "verify",
        "--suite",
        "newton",
    ]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ball = &report["results"][0];
    assert_eq!(ball["test_id"], "newton.ball_gap");
    assert!(ball["metric"].as_f64().unwrap() < 1e-14);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.contains("verify"));
}
