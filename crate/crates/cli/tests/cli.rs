use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridsim"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn golden_config_matches_frozen_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", s(&data("golden.json")), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let golden = fs::read_to_string(data("golden_results.csv")).unwrap();
    assert_eq!(csv, golden);
    assert_eq!(csv.lines().count(), 1 + 5 * 3);
    assert!(csv.ends_with('\n'));
    let svg = fs::read_to_string(dir.path().join("rates.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 5);
}

#[test]
fn results_json_reloads_as_the_same_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(run(&["run", s(&data("golden.json")), "--out", s(first.path())]).status.code(), Some(0));
    let json = first.path().join("results.json");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["nt"], 16);
    assert_eq!(doc["results"]["master_seed"], 20170601u64);
    let out = run(&["run", s(&json), "--out", s(second.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["results.csv", "results.json", "rates.svg"] {
        assert_eq!(
            fs::read(first.path().join(name)).unwrap(),
            fs::read(second.path().join(name)).unwrap(),
            "{name} differs after reload"
        );
    }
}

#[test]
fn missing_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["run", s(&dir.path().join("absent.json")), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"nt\": 16,\n  \"nr\": 4,\n  \"ntrx\": 2,\n  \"snr_grid_db\": [0, 5, 5]\n}\n").unwrap();
    let out = run(&["run", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":5: snr_grid_db"), "{err}");

    fs::write(&cfg, "{\n  \"nt\": 16,\n  \"nr\": 4\n  \"ntrx\": 2\n}\n").unwrap();
    let out = run(&["run", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":4:"));

    fs::write(&cfg, r#"{"nt": 16, "nr": 4, "ntrx": 2, "colour": "red"}"#).unwrap();
    let out = run(&["run", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = run(&["run", s(&data("golden.json")), "--out", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn plot_can_be_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"nt": 16, "nr": 4, "ntrx": 2, "trials": 1, "snr_grid_db": [0], "plot": false}"#).unwrap();
    let out_dir = dir.path().join("o");
    assert_eq!(run(&["run", s(&cfg), "--out", s(&out_dir)]).status.code(), Some(0));
    assert!(out_dir.join("results.csv").exists());
    assert!(!out_dir.join("rates.svg").exists());
}

#[test]
fn quantization_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.json");
    fs::write(&cfg, r#"{"pairs": [[64, 2], [32, 4], [16, 8], [16, 1]]}"#).unwrap();
    let out_file = dir.path().join("report.csv");
    let out = run(&["quantization-report", s(&cfg), "--out", s(&out_file)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("nt,ntrx,frobenius_error,p_rows,p_cols,row_nonzeros"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows[..3] {
        assert_eq!(&r[3..], &["128", "16384", "128"]);
    }
    assert_eq!(rows[3][..3], ["16", "1", "0"]);
}

#[test]
fn quantization_report_rejects_bad_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.json");
    fs::write(&cfg, "{\n  \"pairs\": [[2, 4]]\n}\n").unwrap();
    let out = run(&["quantization-report", s(&cfg), "--out", s(&dir.path().join("r.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2: pairs"));
}

fn figure_echo(args: &[&str]) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let mut full = vec!["figures"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", s(dir.path()), "--trials", "1", "--no-plot"]);
    let out = run(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap()
}

#[test]
fn figure_presets_echo_their_dimensions() {
    let fig2 = figure_echo(&["fig2"]);
    assert_eq!((fig2["nt"].as_u64(), fig2["nr"].as_u64(), fig2["ntrx"].as_u64()), (Some(256), Some(16), Some(8)));
    assert_eq!(figure_echo(&["fig3", "--scale", "0.25"])["ntrx"], 2);
    let fig4 = figure_echo(&["fig4", "--scale", "0.5"]);
    assert_eq!(fig4["ntrx"], 8);
    assert_eq!(figure_echo(&["fig4"])["nt"], 64);
    assert_eq!(figure_echo(&["fig4", "--caption-ntrx", "--scale", "0.5", "--seed", "9"])["master_seed"], 9);
}

#[test]
fn figure_flag_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["figures", "fig2", "--scale", "0", "--out", s(dir.path())],
        vec!["figures", "fig5", "--out", s(dir.path())],
        vec!["figures", "fig2", "--caption-ntrx", "--out", s(dir.path())],
        vec!["figures", "fig2", "--trials", "0", "--out", s(dir.path())],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}
