use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn zebra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zebra"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("zebra binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = zebra(args);
    assert!(
        out.status.success(),
        "zebra {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn build_fixture_index(dir: &Path) -> String {
    let idx = dir.join("fixture.idx").display().to_string();
    let corpus = data("corpus.jsonl").display().to_string();
    let mapping = data("mapping.tsv").display().to_string();
    let out = ok(&[
        "index",
        "--corpus",
        &corpus,
        "--mapping",
        &mapping,
        "--out",
        &idx,
    ]);
    assert!(out.starts_with("indexed 12 documents"), "{out}");
    idx
}

#[test]
fn index_then_search() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_fixture_index(dir.path());

    let out = ok(&[
        "search",
        "--index",
        &idx,
        "--query",
        "copper tremor liver",
        "--format",
        "json",
        "-n",
        "2",
    ]);
    let resp: Value = serde_json::from_str(&out).unwrap();
    let hits = resp["results"].as_array().unwrap();
    assert_eq!(hits.len(), 2);
    for h in hits {
        assert!(
            ["gard-7405", "orpha-905"].contains(&h["doc_id"].as_str().unwrap()),
            "{h}"
        );
    }

    let table = ok(&[
        "search", "--index", &idx, "--query", "copper", "--model", "jm", "--lambda", "0.5",
    ]);
    assert!(table.contains("Wilson disease"), "{table}");
}

#[test]
fn concept_modes_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_fixture_index(dir.path());
    let out = ok(&[
        "search",
        "--index",
        &idx,
        "--query",
        "ketoacidosis vomiting lethargy",
        "--mode",
        "concepts",
        "--format",
        "json",
    ]);
    let resp: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(resp["results"][0]["concept_id"], "C0268579");

    let out = ok(&[
        "search", "--index", &idx, "--query", "C0002986", "--by", "concept", "--format", "json",
    ]);
    let resp: Value = serde_json::from_str(&out).unwrap();
    let ids: Vec<&str> = resp["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["doc_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["gard-6036", "omim-300644", "orpha-324"]);
}

#[test]
fn eval_reports_mrr_for_handmade_run() {
    // Relevant at rank 1, rank 4, and never: MRR = (1 + 1/4 + 0) / 3.
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    std::fs::write(
        p("queries.tsv"),
        "q1\tHLJ\tfirst\nq2\tOJRD\tsecond\nq3\tBMJ\tthird\n",
    )
    .unwrap();
    std::fs::write(p("qrels.tsv"), "q1\ta\t1\nq2\td\t1\nq2\ta\t0\nq3\tz\t1\n").unwrap();
    let mut run = String::new();
    for (q, docs) in [("q1", "abc"), ("q2", "abcd"), ("q3", "ab")] {
        for (i, d) in docs.chars().enumerate() {
            run.push_str(&format!("{q}\t{d}\t{}\t{}\tmanual\n", i + 1, -(i as f64)));
        }
    }
    std::fs::write(p("run.tsv"), run).unwrap();

    let out_dir = p("report");
    let table = ok(&[
        "eval",
        "--run",
        &p("run.tsv"),
        "--queries",
        &p("queries.tsv"),
        "--qrels",
        &p("qrels.tsv"),
        "--out",
        &out_dir,
    ]);
    assert!(table.contains("0.4167"), "{table}");
    assert!(table.contains("2 (66.7%)"), "{table}");
    let report: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("report/report.json")).unwrap(),
    )
    .unwrap();
    let mrr = report["reports"][0]["mrr"].as_f64().unwrap();
    assert!((mrr - 1.25 / 3.0).abs() < 1e-12);
    assert!(dir.path().join("report/report.txt").exists());
}

#[test]
fn eval_runs_queries_against_index() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_fixture_index(dir.path());
    let out_dir = dir.path().join("eval").display().to_string();
    let queries = data("queries.tsv").display().to_string();
    let qrels = data("qrels.tsv").display().to_string();
    let out = ok(&[
        "eval",
        "--index",
        &idx,
        "--queries",
        &queries,
        "--qrels",
        &qrels,
        "--out",
        &out_dir,
        "--format",
        "json",
    ]);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["reports"][0]["n_queries"], 5);
    let run = std::fs::read_to_string(dir.path().join("eval/run.tsv")).unwrap();
    assert!(run.lines().all(|l| l.split('\t').count() == 5));
    assert!(run.lines().any(|l| l.starts_with("q1\t")));
}

#[test]
fn bad_input_exits_nonzero() {
    let out = zebra(&["search", "--index", "/nonexistent/idx", "--query", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let idx = build_fixture_index(dir.path());
    let out = zebra(&[
        "search", "--index", &idx, "--query", "fever", "--model", "jm", "--lambda", "1.5",
    ]);
    assert!(!out.status.success());
    let out = zebra(&["search", "--index", &idx, "--query", "..."]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty query"));
}
