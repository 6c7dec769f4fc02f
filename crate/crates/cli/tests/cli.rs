use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdm"))
        .args(args)
        .env_remove("PDM_OUT_DIR")
        .env_remove("PDM_THREADS")
        .output()
        .expect("spawn pdm")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn fill_config(d: usize, steps: usize, tol: f64) -> String {
    format!(
        r#"{{"schema":"pdm-config/v1","method":"pdm","objective":{{"id":"fill"}},"dim":{d},"tol":{tol},"max_iters":{steps},"seed":1}}"#
    )
}

fn run_fill(dir: &Path, d: usize, steps: usize) -> String {
    let cfg = write(dir, "fill.json", &fill_config(d, steps, 0.0));
    let out = dir.join("run");
    // tol 0 never converges, so the run reports max_iters and exits 1.
    let o = pdm(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    out.join("division.json").to_str().unwrap().to_owned()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = write(tmp.path(), "ok.json", &fill_config(2, 50, 0.2));
    let o = pdm(&["run", "--config", &ok, "--out-dir", tmp.path().join("a").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let capped = write(tmp.path(), "capped.json", &fill_config(2, 3, 1e-9));
    let o = pdm(&["run", "--config", &capped, "--out-dir", tmp.path().join("b").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(pdm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pdm(&["run"]).status.code(), Some(2));
    assert_eq!(pdm(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(
        tmp.path(),
        "bad.json",
        "{\n  \"schema\": \"pdm-config/v1\",\n  \"method\": \"pdm\",\n  \"objective\": { \"id\": \"fill\" },\n  \"dim\": 2,\n  \"tol\": -1\n}\n",
    );
    let o = pdm(&["run", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:6"), "{err}");
    assert!(err.contains("tol"), "{err}");

    let unknown = write(
        tmp.path(),
        "unknown.json",
        "{\n  \"schema\": \"pdm-config/v1\",\n  \"method\": \"pdm\",\n  \"objective\": { \"id\": \"nope\" }\n}\n",
    );
    let o = pdm(&["run", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown.json:4:"));

    let syntax = write(tmp.path(), "syntax.json", "{\n  \"tol\": 1e-3,\n  oops\n}\n");
    let o = pdm(&["run", "--config", &syntax]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax.json:3:"));
}

#[test]
fn check_division_fresh_and_corrupted() {
    let tmp = tempfile::tempdir().unwrap();
    let path = run_fill(tmp.path(), 3, 20);
    let o = pdm(&["check-division", &path, "--samples", "20000", "--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["uncovered"], 0);
    assert_eq!(report["oracle_mismatches"], 0);

    let mut rec: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    rec["cells"].as_array_mut().unwrap().remove(0);
    let broken = tmp.path().join("broken.json");
    fs::write(&broken, serde_json::to_string(&rec).unwrap()).unwrap();
    let o = pdm(&["check-division", broken.to_str().unwrap(), "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_division_after_fifty_steps_in_five_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    let path = run_fill(tmp.path(), 5, 50);
    let o = pdm(&["check-division", &path, "--samples", "100000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["volume_sum_rel_err"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["multiply_covered_interior"], 0);
}

#[test]
fn snapshot_svg_renders_two_dimensional_divisions() {
    let tmp = tempfile::tempdir().unwrap();
    let path = run_fill(tmp.path(), 2, 10);
    let svg = tmp.path().join("div.svg");
    let o = pdm(&["snapshot-svg", &path, svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    let rec: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let cells = rec["cells"].as_array().unwrap().len();
    assert_eq!(text.matches("<polygon").count(), cells);

    let d3 = tempfile::tempdir().unwrap();
    let path3 = run_fill(d3.path(), 3, 2);
    let o = pdm(&["snapshot-svg", &path3, d3.path().join("x.svg").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn gsm_summary_reports_sampler_and_sample_size() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "gsm.json",
        r#"{"schema":"pdm-config/v1","method":"gsm","objective":{"id":"rb-thermal","grid":17},"dim":6,"tol":1e-6,"max_iters":64,"seed":7}"#,
    );
    let out = tmp.path().join("out");
    let o = pdm(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["config"]["gsm"]["sampler"], "random");
    assert_eq!(s["config"]["gsm"]["sample_size"], 64);
    assert_eq!(s["status"], "converged");

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# schema=pdm-trace/v1 seed=7 config={"));
    assert_eq!(
        lines.next().unwrap(),
        "step,selected_cell,err,n_cells,distinct_points,total_evals,wall_ms"
    );
    for row in lines {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 7);
        assert_eq!(f[3], "64");
    }
}

#[test]
fn out_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "ok.json", &fill_config(2, 50, 0.2));
    let env_dir = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_pdm"))
        .args(["run", "--config", &cfg])
        .env("PDM_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("trace.csv").exists());
}

#[test]
fn compare_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "cmp.json",
        r#"{"schema":"pdm-config/v1","objective":{"id":"rb-thermal","grid":9},"tol":1e-3,"seed":0,"compare":{"dims":[2,4],"methods":["pdm","gsm"]}}"#,
    );
    let out = tmp.path().join("cmp");
    let o = pdm(&["compare", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--no-timing"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("compare.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], pdm_cli::commands::COMPARE_COLUMNS);
    assert_eq!(rows.len(), 5);
    assert!(out.join("runs").is_dir());
}
