use std::process::{Command, Output};

const CONTRACTING: &str = r#"{"c":0.5,"alpha":2,"beta":2,"v1":0.2,"v0":0.1}"#;
const FULL: &str = r#"{"c":0.5,"alpha":2,"beta":2,"v1":1,"v0":0}"#;

fn lorenz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorenz")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_contracting_instance() {
    let out = lorenz(&["classify", "--map", CONTRACTING]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "classify");
    assert_eq!(v["params"]["v1"], 0.2);
    assert_eq!(v["tolerances"]["max_bisect"], 80);
    let orbits = v["result"]["kind"]["PeriodicAttractors"].as_array().expect("periodic verdict");
    assert_eq!(orbits[0]["points"][0], 0.0);
}

#[test]
fn invalid_parameters_exit_one() {
    let out = lorenz(&["validate", "--map", r#"{"c":0,"alpha":2,"beta":2,"v1":1,"v0":0}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["violations"][0], "CriticalPointRange");
    assert!(String::from_utf8_lossy(&out.stderr).contains("c must lie in (0,1)"));
}

#[test]
fn malformed_config_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    std::fs::write(&path, "{\"c\": 0.5,\n \"alpha\": 2, \"beta\": 2,\n \"v1\": 1, \"vzero\": 0}\n").unwrap();
    let out = lorenz(&["orbit", "--map", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("vzero"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_exit_one() {
    assert_eq!(lorenz(&["classify", "--map", "/nonexistent/map.json"]).status.code(), Some(1));
    assert_eq!(lorenz(&["classify"]).status.code(), Some(1));
    assert_eq!(lorenz(&["--help"]).status.code(), Some(0));
}

#[test]
fn periodic_table() {
    let out = lorenz(&["periodic", "--map", FULL, "--max-period", "2", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "itinerary\tperiod\tmultiplier\tstability\tpoint");
    assert_eq!(lines.len(), 5);
}

#[test]
fn return_map_of_the_full_map() {
    let out = lorenz(&["return-map", "--map", FULL, "--lo", "0.25", "--hi", "0.75"]);
    assert!(out.status.success());
    let v = json(&out);
    let branches = v["result"]["branches"].as_array().unwrap();
    assert!(branches.len() > 10);
    assert_eq!(branches[0]["return_time"], 2);
}

#[test]
fn return_map_requires_a_nice_interval() {
    let out = lorenz(&["return-map", "--map", FULL, "--lo", "0.1", "--hi", "0.75"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rigid_rotation_locks() {
    let out = lorenz(&["rotation", "--rigid", "0.3333333333333333", "--n", "1000"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["params"].is_null());
    assert_eq!(v["result"]["trace"][0]["rational_lock"]["q"], 3);
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let spec = r#"{"c":0.5,"alpha":2,"beta":2,
        "v1":{"lo":0.5,"hi":1,"steps":10},"v0":{"lo":0,"hi":0.45,"steps":10},
        "settings":{"max_period":6,"grid":256,"horizon":500,"depth":1,"samples":4,"rotation_n":2000}}"#;
    let status = lorenz(&["sweep", "--spec", spec, "--out", out.to_str().unwrap(), "--seed", "3"]).status;
    assert!(status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "c");
    assert_eq!(&headers[5], "status");
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| &r[5] == "ok" || &r[5] == "rejected"));
    assert!(rows.iter().any(|r| &r[5] == "ok"));
}
