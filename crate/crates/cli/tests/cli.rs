use std::path::Path;
use std::process::{Command, Output};

fn biproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biproj")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BILINEAR: [&str; 6] = ["--form", "x1*y1 - x2*y2", "--n1", "2", "--n2", "2"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: &[String]) -> Output {
    biproj(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn count_small_box() {
    let o = run(&with(&["count"], &[&BILINEAR[..], &["--p1", "1", "--p2", "1"]].concat()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "33");
}

#[test]
fn rational_box_sides() {
    let o = run(&with(&["count"], &[&BILINEAR[..], &["--p1", "3/2", "--p2", "1"]].concat()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "33");
}

#[test]
fn height_counts_match_known_values() {
    let o = run(&with(&["count"], &[&BILINEAR[..], &["--heights", "4,100"]].concat()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# config-hash: "));
    assert_eq!(lines.next(), Some("P,count,seconds"));
    let counts: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts.len(), 2);
}

#[test]
fn validate_reports_byte_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"count","n1":2,"n2":2,"forms":["x1*y1 + x1"]}"#).unwrap();
    let o = biproj(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("NonBihomogeneous"), "{err}");
    assert!(err.contains("byte 8"), "{err}");
    assert!(err.contains("forms[0]"), "{err}");
}

#[test]
fn validate_accepts_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"count","n1":2,"n2":2,"forms":["x1*y1 - x2*y2"],"params":{"p1":"2"}}"#).unwrap();
    let o = biproj(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok"));
}

#[test]
fn unknown_task_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"frobnicate","n1":2,"n2":2,"forms":["x1*y1"]}"#).unwrap();
    let o = biproj(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frobnicate"));
}

#[test]
fn unknown_subcommand() {
    assert_eq!(biproj(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn param_type_error_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"count","n1":2,"n2":2,"forms":["x1*y1 - x2*y2"],"params":{"heights":"many"}}"#)
        .unwrap();
    let o = biproj(&["count", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.heights"), "{}", stderr(&o));
}

#[test]
fn unknown_param_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"count","n1":2,"n2":2,"forms":["x1*y1 - x2*y2"],"params":{"colour":1}}"#).unwrap();
    let o = biproj(&["count", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_params() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"count","n1":2,"n2":2,"forms":["x1*y1 - x2*y2"],"params":{"p1":"5"}}"#).unwrap();
    let o = biproj(&["count", "--config", path.to_str().unwrap(), "--p1", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "33");
}

#[test]
fn budget_exceeded_exit_code() {
    let o = run(&with(&["count"], &[&BILINEAR[..], &["--p1", "100000", "--budget", "1000"]].concat()));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn hypothesis_height_margin() {
    let o = biproj(&[
        "hypothesis", "--d1", "2", "--d2", "2", "--R", "1", "--n1", "200", "--n2", "200", "--dimv1", "200", "--dimv2",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let height = out.lines().find(|l| l.starts_with("height")).expect("height line");
    let fields: Vec<&str> = height.split_whitespace().collect();
    assert_eq!(fields, ["height", "200.000000", ">", "192.000000", "margin", "8.000000", "ok"]);
}

fn csv_with_workers(dir: &Path, workers: &str) -> String {
    let path = dir.join(format!("out-{workers}.csv"));
    let o = run(&with(
        &["density-inf"],
        &[&["--form", "x1*y1 + x2*y2 - x3*y3", "--n1", "3", "--n2", "3"][..], &[
            "--samples",
            "20000",
            "--seed",
            "7",
            "--workers",
            workers,
            "--output",
            path.to_str().unwrap(),
        ]]
        .concat(),
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn csv_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = csv_with_workers(dir.path(), "1");
    let two = csv_with_workers(dir.path(), "2");
    assert!(one.starts_with("# config-hash: "));
    assert_eq!(one, two);
}

#[test]
fn timings_fill_seconds_column() {
    let o = run(&with(&["count"], &[&BILINEAR[..], &["--heights", "50", "--timings"]].concat()));
    let out = stdout(&o);
    let row = out.lines().nth(2).unwrap();
    assert!(!row.ends_with(','), "{row}");
}

#[test]
fn hyperbola_decomposition_is_exact() {
    let o = biproj(&["hyperbola", "--function", "one", "--heights", "4,100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][6], "8");
    assert_eq!(rows[1][6], "482");
    for r in &rows {
        assert_eq!(r[6], r[7]);
    }
}

#[test]
fn complete_sum_for_single_form() {
    let o = run(&with(&["expsum"], &[&BILINEAR[..], &["--y", "1,1", "--q", "3", "--a", "1"]].concat()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("S = "));
}

#[test]
fn mismatched_task_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.json");
    std::fs::write(&path, r#"{"task":"series","n1":2,"n2":2,"forms":["x1*y1 - x2*y2"]}"#).unwrap();
    let o = biproj(&["count", "--config", path.to_str().unwrap(), "--p1", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
