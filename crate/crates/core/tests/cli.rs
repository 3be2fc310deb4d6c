use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use poincare_lab::report::{read_jsonl, RunRecord};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_poincare-lab"));
    c.env_remove("POINCARE_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn jsonl(text: &str) -> Vec<Value> {
    read_jsonl(text.as_bytes()).unwrap()
}

const EXAMPLE: &str = r#"{"dim":2,"terms":[{"alpha":[0,0],"coef":3.0},{"alpha":[1,0],"coef":-2.0},{"alpha":[1,1],"coef":1.0}]}"#;

#[test]
fn decompose_prints_three_parts() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.json", EXAMPLE);
    let o = run(&["decompose", &f]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p0"]["terms"][0]["coef"], 3.0);
    assert_eq!(v["plus"]["terms"][0]["alpha"], serde_json::json!([1, 1]));
    assert_eq!(v["minus"]["terms"][0]["coef"], -2.0);
    assert_eq!(v["schema_version"], "1.0");

    let empty = write(dir.path(), "e.json", r#"{"dim":2,"terms":[]}"#);
    let v: Value = serde_json::from_str(&stdout(&run(&["decompose", &empty]))).unwrap();
    for part in ["p0", "plus", "minus"] {
        assert_eq!(v[part]["terms"], serde_json::json!([]));
    }
}

#[test]
fn decompose_reports_duplicate_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "dup.json",
        r#"{"dim":2,"terms":[{"alpha":[1,0],"coef":1.0},{"alpha":[0,1],"coef":2.0},{"alpha":[1,0],"coef":4.0}]}"#,
    );
    let o = run(&["decompose", &f]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("term 2: duplicate alpha [1,0]"), "{err}");
}

#[test]
fn norm_constant_exact_and_mc() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", r#"{"dim":3,"terms":[{"alpha":[0,0,0],"coef":-2.5}]}"#);
    let v: Value = serde_json::from_str(&stdout(&run(&["norm", &c, "--q", "0.7"]))).unwrap();
    assert_eq!(v["total"], 2.5);

    let p = write(dir.path(), "p.json", EXAMPLE);
    let v: Value = serde_json::from_str(&stdout(&run(&["norm", &p, "--q", "1", "--method", "exact"]))).unwrap();
    assert_eq!(v["total"], 4.25);
    assert_eq!(v["total_exact"], "17/4");
    assert_eq!(v["plus"]["integral_exact"], "1/4");

    let a = run(&["norm", &p, "--q", "0.8", "--method", "mc", "--seed", "7"]);
    let b = run(&["norm", &p, "--q", "0.8", "--method", "mc", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["plus"]["integral"]["rng"]["algorithm"], "chacha8");

    let o = run(&["norm", &p, "--q", "0.8", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn norm_run_record_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", EXAMPLE);
    let out = dir.path().join("rec.json");
    let o = run(&["norm", &p, "--q", "0.75", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let rec = RunRecord::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec.command, "norm");
    assert_eq!(rec.params["q"], 0.75);
    assert_eq!(rec.params["eval"]["tol"], 1e-9);
    let printed: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec.payloads, vec![printed]);
}

#[test]
fn monomial_table_rows_and_sup() {
    let o = run(&["monomial-table", "--dim", "1", "--p", "0.6", "--k", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let ratios: Vec<f64> = rows[..3].iter().map(|x| x[3].parse().unwrap()).collect();
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    assert!(rows[3][0].starts_with("sup="));
    assert_eq!(rows[3][3].parse::<f64>().unwrap(), max);

    // boundary exponent: p* = 1
    let o = run(&["monomial-table", "--dim", "2", "--p", "0.6666666666666666", "--k", "2"]);
    assert!(o.status.success());
    let o = run(&["monomial-table", "--dim", "2", "--p", "0.5", "--k", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("window"));
}

#[test]
fn verify_streams_are_reproducible() {
    let args = ["verify", "--theorem", "1.3", "--dim", "2", "--p", "0.8", "--samples", "4", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let recs = jsonl(&stdout(&a));
    assert_eq!(recs.len(), 5);
    assert!(recs[..4].iter().all(|r| r["kind"] == "ratio" && r["ratio"].is_f64()));
    let summary = &recs[4];
    assert_eq!(summary["kind"], "summary");
    assert_eq!(summary["records"], 4);
    let max = recs[..4].iter().map(|r| r["ratio"].as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(summary["max_ratio"].as_f64().unwrap(), max);
    assert_eq!(summary["oracle"]["checked"], summary["oracle"]["within_3se"]);

    let env = bin()
        .args(&args[..args.len() - 2])
        .env("POINCARE_LAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn verify_zero_samples_is_summary_only() {
    let o = run(&["verify", "--dim", "3", "--p", "0.9", "--samples", "0"]);
    assert!(o.status.success());
    let recs = jsonl(&stdout(&o));
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["kind"], "summary");
    assert_eq!(recs[0]["degenerate"], 0);
}

#[test]
fn verify_rejects_out_of_window_before_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.jsonl");
    let o = run(&[
        "verify", "--theorem", "1.4", "--dim", "2", "--p", "0.9", "--m", "3", "--samples", "5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let o = run(&["verify", "--theorem", "poincare", "--dim", "2", "--p", "1.0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_embedding_and_higher() {
    let o = run(&["verify", "--theorem", "embedding", "--dim", "2", "--p", "0.9", "--samples", "3"]);
    assert!(o.status.success());
    let recs = jsonl(&stdout(&o));
    assert!(recs[..3].iter().all(|r| r["kind"] == "embedding" && r["constant_norm_equal"] == true));
    assert_eq!(recs[3]["sub_identities_hold"], 3);

    let o = run(&["verify", "--theorem", "higher", "--dim", "3", "--p", "0.9", "--m", "2", "--samples", "3"]);
    assert!(o.status.success());
    assert_eq!(jsonl(&stdout(&o))[0]["params"]["m"], 2);
}

#[test]
fn degenerate_reports_have_no_nan() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", r#"{"dim":2,"terms":[{"alpha":[0,0],"coef":4.0}]}"#);
    let o = run(&["verify", "--poly", &c, "--p", "0.8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains("NaN") && !text.contains("inf"));
    let recs = jsonl(&text);
    assert_eq!(recs[0]["degenerate"], true);
    assert!(recs[0]["ratio"].is_null());
    assert_eq!(recs[1]["degenerate"], 1);
}

#[test]
fn search_witness_rescores_to_recorded_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.json");
    let rec = dir.path().join("rec.json");
    let o = run(&[
        "search-constant", "--dim", "2", "--p", "0.85", "--seed", "4", "--degree", "3",
        "--random-budget", "15", "--climb-budget", "15", "--no-monomials",
        "--witness-out", witness.to_str().unwrap(), "--out", rec.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = RunRecord::from_json(&std::fs::read_to_string(&rec).unwrap()).unwrap();
    assert_eq!(rec.payloads.len(), 1);
    let est = &rec.payloads[0];
    assert_eq!(est["kind"], "constant-estimate");
    assert!(est["witness"]["terms"].is_array());
    let recorded = est["value"].as_f64().unwrap();

    let o = run(&["verify", "--poly", witness.to_str().unwrap(), "--p", "0.85"]);
    let rescored = jsonl(&stdout(&o))[0]["ratio"].as_f64().unwrap();
    assert!((rescored - recorded).abs() <= 1e-10 * recorded);
}

fn sweep_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "sweep", "--dims", "1,2", "--ps", "lower,0.9", "--degree", "3",
        "--random-budget", "8", "--climb-budget", "8", "--seed", "3", "--out", out,
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn sweep_parallel_resume_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.jsonl");
    let p = dir.path().join("par.jsonl");
    let plot = dir.path().join("plot.txt");
    let (s, p, plot) = (s.to_str().unwrap(), p.to_str().unwrap(), plot.to_str().unwrap());
    assert!(run(&sweep_args(s, &["--plot", plot])).status.success());
    assert!(run(&sweep_args(p, &["--parallel"])).status.success());
    let full = std::fs::read(s).unwrap();
    assert_eq!(full, std::fs::read(p).unwrap());

    let recs = jsonl(std::str::from_utf8(&full).unwrap());
    assert_eq!(recs.len(), 6);
    assert_eq!(recs[0]["kind"], "run");
    assert!(recs[1..5].iter().all(|r| r["kind"] == "cell" && r["estimate"]["value"].is_f64()));
    assert_eq!(recs[5]["failed"], 0);

    let plot_text = std::fs::read_to_string(plot).unwrap();
    assert!(plot_text.starts_with("# N=1\n0.5 "));
    assert!(plot_text.contains("\n\n# N=2\n"));

    // keep the header and two cells, then resume
    let text = std::str::from_utf8(&full).unwrap();
    let partial: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    std::fs::write(p, partial).unwrap();
    let o = run(&sweep_args(p, &["--resume"]));
    assert!(o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().contains("2 of 4 cells"));
    assert_eq!(std::fs::read(p).unwrap(), full);

    // different parameters: refuse
    let o = bin().args(sweep_args(p, &["--resume"])).arg("--support").arg("2").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_cell_failures_are_in_band() {
    let o = run(&["sweep", "--dims", "1", "--ps", "0.7", "--support", "0"]);
    assert_eq!(o.status.code(), Some(5));
    let recs = jsonl(&stdout(&o));
    assert!(recs[1]["error"].as_str().unwrap().contains("support"));
    assert_eq!(recs[2]["failed"], 1);
}
