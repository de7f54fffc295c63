use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn cknscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cknscope")).args(args).env("CKNSCOPE_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV with `#` parameter lines, as (header, rows).
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let head = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (head, rows)
}

fn col(head: &[String], name: &str) -> usize {
    head.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn gen_writes_a_loadable_flow() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.nsflow");
    let p = path.to_str().unwrap();
    stdout(&cknscope(&["gen", "--kind", "beltrami", "--n", "16", "--n-times", "3", "--out", p]));
    let flow = cknscope::flowfield::load_flow(&path).unwrap();
    assert_eq!(flow.grid().n, 16);
    assert_eq!(flow.grid().n_times, 3);
    assert!(flow.metadata().contains("kind=beltrami"));
}

#[test]
fn unknown_generator_is_rejected() {
    let o = cknscope(&["gen", "--kind", "vortex", "--out", "/dev/null"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("vortex"));
}

#[test]
fn shear_functionals_row() {
    let (head, rows) = csv(&stdout(&cknscope(&["functionals", "--kind", "shear", "--r", "0.5"])));
    assert_eq!(rows.len(), 1);
    let r: f64 = 0.5;
    let a: f64 = rows[0][col(&head, "A")].parse().unwrap();
    let e: f64 = rows[0][col(&head, "E_q")].parse().unwrap();
    assert!((a / (4.0 * PI * r.powi(4) / 15.0) - 1.0).abs() < 1e-2, "A = {a}");
    assert!((e / (4.0 * PI * r.powi(4) / 3.0) - 1.0).abs() < 1e-2, "E = {e}");
    assert_eq!(rows[0][col(&head, "D")], "0.0");
}

#[test]
fn missing_pressure_is_an_error() {
    let o = cknscope(&["functionals", "--kind", "selfsimilar", "--n", "16", "--n-times", "3", "--require-pressure"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("pressure"));
}

#[test]
fn under_resolved_radius_is_an_error() {
    let o = cknscope(&["functionals", "--kind", "shear", "--n", "16", "--n-times", "3", "--r", "0.5"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("under-resolved"));
}

#[test]
fn functionals_json_echoes_parameters() {
    let text = stdout(&cknscope(&["functionals", "--kind", "shear", "--r", "0.5", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["parameters"]["kind"], "shear");
    assert_eq!(v["parameters"]["q"], "2");
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--fields", "2", "--resolutions", "32", "--format", "json"];
    let a = stdout(&cknscope(&args));
    let b = stdout(&cknscope(&args));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let fits = v["report"]["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 10);
    assert!(v["report"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_single_qk_echoes_exponents() {
    let text = stdout(&cknscope(&[
        "verify", "--fields", "1", "--resolutions", "32", "--lemma", "L52", "--q", "2", "--k", "0.25", "--format", "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["parameters"]["alpha"], "0.75");
    assert_eq!(v["parameters"]["beta"], "0.75");
    let fits = v["report"]["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 1);
    assert_eq!(fits[0]["lemma"], "L52");
}

#[test]
fn verify_rejects_k_outside_range() {
    let o = cknscope(&["verify", "--fields", "1", "--resolutions", "32", "--q", "2", "--k", "0.5"]);
    assert!(!o.status.success());
}

#[test]
fn verify_baseline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("base.json");
    let text = stdout(&cknscope(&["verify", "--fields", "1", "--resolutions", "32", "--format", "json"]));
    std::fs::write(&path, &text).unwrap();
    let again = stdout(&cknscope(&[
        "verify", "--fields", "1", "--resolutions", "32", "--format", "json", "--baseline", path.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&again).unwrap();
    let cmp = v["report"]["baseline"].as_array().unwrap();
    assert_eq!(cmp.len(), 10);
    assert!(cmp.iter().all(|c| c["pass"] == true));
}

fn scan_beltrami(extra: &[&str]) -> Output {
    let mut args = vec![
        "scan", "--kind", "beltrami", "--amplitudes", "0.1,0.07,0.05", "--n", "64", "--n-times", "33", "--r-max", "0.6",
    ];
    args.extend_from_slice(extra);
    cknscope(&args)
}

#[test]
fn scan_small_beltrami_is_regular() {
    let (head, rows) = csv(&stdout(&scan_beltrami(&["--cube", "0.5,2", "--epsilon", "0.1"])));
    assert_eq!(rows.len(), 8 * 4);
    let d = col(&head, "decision");
    assert!(rows.iter().all(|r| r[d] == "regular"), "{rows:?}");
}

#[test]
fn scan_reports_infeasible_points_per_row() {
    let o = scan_beltrami(&["--point", "0,0,0", "--point", "3.14159,3.14159,3.14159"]);
    let (head, rows) = csv(&stdout(&o));
    let (d, e) = (col(&head, "decision"), col(&head, "error"));
    assert_eq!(rows.len(), 8);
    assert!(rows[..4].iter().all(|r| r[d] == "error" && !r[e].is_empty()));
    assert!(rows[4..].iter().all(|r| r[d] == "regular" && r[e].is_empty()));
    let strict = scan_beltrami(&["--point", "0,0,0", "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn iteration_trace_converges() {
    let (head, rows) = csv(&stdout(&cknscope(&["trace", "--iteration", "--beta", "2", "--q", "2", "--M", "2", "--steps", "60"])));
    let y = col(&head, "Y");
    let last: f64 = rows.last().unwrap()[y].parse().unwrap();
    assert!((last - 32768.0).abs() < 1e-9 * 32768.0, "Y = {last}");
}

#[test]
fn epsilon_curve_rows() {
    let (head, rows) = csv(&stdout(&cknscope(&["trace", "--epsilon-curve", "--eps", "0.05", "--M", "1,2,4"])));
    assert_eq!(head, ["M", "epsilon_over_M"]);
    let got: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    for ((m, e), (m0, e0)) in got.iter().zip([(1.0, 0.05), (2.0, 0.025), (4.0, 0.0125)]) {
        assert_eq!(*m, m0);
        assert!((e - e0).abs() < 1e-15);
    }
}

#[test]
fn theorem2_trace_rejects_large_epsilon() {
    let o = cknscope(&["trace", "--theorem2", "--eps", "0.1", "--M", "2"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
}

#[test]
fn trace_needs_a_mode() {
    assert!(!cknscope(&["trace"]).status.success());
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let args = ["trace", "--epsilon-curve", "--M", "1,3"];
    let s = stdout(&cknscope(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    stdout(&cknscope(&with_out));
    assert_eq!(std::fs::read_to_string(Path::new(&path)).unwrap(), s);
}
