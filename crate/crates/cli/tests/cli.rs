use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amoebalab")).args(args).output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classical_line_reports_three_components() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = run(&["classical", "--poly", "1+z1+z2", "--grid", "80", "--report", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v = report(&rep);
    assert_eq!(v["schema"], "amoebalab/1");
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["results"]["components"]["count"], 3);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn invalid_configurations_exit_2() {
    for args in [
        &["classical", "--poly", "1+z1+z2", "--box", "1,1,-6,6"][..],
        &["classical", "--poly", "1+z1+"],
        &["classical", "--poly", "1+z1+z2", "--grid", "4"],
        &["generalized", "--points", "0,1", "--residues", "1,0;0,1"],
        &["generalized", "--points", "0,1", "--residues", "1,0;0", "--seed", "1"],
        &["fan-limit", "--points", "0,1", "--residues", "1,0;0,1", "--seed", "1", "--ts", "2,1"],
        &["superform-check"],
        &["no-such-mode"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn failing_check_exits_3_and_still_reports() {
    // the box misses the walls of the amoeba, so the MA mass is far from 1/2
    let out = run(&["classical", "--poly", "1+z1+z2", "--box", "20,26,-26,-20", "--grid", "40"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], false);
    let failing: Vec<&str> =
        v["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["name"].as_str().unwrap()).collect();
    assert!(failing.contains(&"ma_mass"), "{failing:?}");
}

#[test]
fn unwritable_report_exits_1() {
    let out = run(&["classical", "--poly", "1+z1+z2", "--grid", "40", "--report", "/nonexistent/dir/r.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generalized_ms1_compares_with_the_classical_line() {
    let out = run(&[
        "generalized", "--points", "0,1", "--residues", "1,0;0,1", "--seed", "3", "--samples", "2e6", "--grid", "200",
        "--compare-classical", "z1-z2-1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cmp = &v["results"]["classical_comparison"];
    assert!(cmp.is_object(), "{v}");
    assert_eq!(cmp["orders_match"], true);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "classical_ronkin_affine"));
}

#[test]
fn emitted_raster_and_csv_have_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (ppm, csv) = (dir.path().join("a.ppm"), dir.path().join("r.csv"));
    let out = run(&[
        "classical", "--poly", "1+z1+z2", "--grid", "90", "--emit", ppm.to_str().unwrap(), "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&ppm).unwrap();
    let header = b"P6\n90 90\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 90 * 90 * 3);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,value");
    assert_eq!(lines.len(), 1 + 91 * 91);
    let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(&first[..2], &[-6.0, -6.0]);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["fan-limit", "--points", "0,2i,-1.5-0.5i", "--residues", "1,0,-0.5;0.5,1,0", "--base-point", "3+i",
        "--seed", "4", "--samples", "2e4"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_amoebalab")).args(args).env("AMOEBALAB_THREADS", "2").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
