use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn plotqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plotqa"))
        .args(args)
        .current_dir(workspace())
        .env_remove("PLOTQA_EMBED_URL")
        .output()
        .unwrap()
}

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_on_mini_fixture() {
    let o = plotqa(&["stats", "--data", "fixtures/mini", "--format", "normalized_jsonl"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let row = |label: &str| {
        text.lines()
            .find(|l| l.starts_with(label))
            .unwrap_or_else(|| panic!("no {label} row in\n{text}"))
            .split_whitespace()
            .last()
            .unwrap()
            .to_string()
    };
    assert_eq!(row("# of Movies"), "2");
    assert_eq!(row("# of Questions"), "6");
    assert_eq!(row("Avg. sentences per plot"), "10.0");
}

#[test]
fn stats_official_reports_every_split() {
    let o = plotqa(&["stats", "--data", "fixtures/official", "--format", "movieqa_official", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let counts: Vec<(String, u64)> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["split"].as_str().unwrap().to_string(), r["num_questions"].as_u64().unwrap()))
        .collect();
    assert_eq!(
        counts,
        vec![("train".into(), 3), ("val".into(), 2), ("test".into(), 1)]
    );
}

#[test]
fn eval_writes_report_with_fixture_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = plotqa(&[
        "eval", "--data", "fixtures/mini", "--k", "5", "--max-tokens", "130", "--reader", "lexical",
        "--out", path_str(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy 66.67% (4/6)"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["num_items"], 6);
    assert_eq!(v["num_correct"], 4);
    assert_eq!(v["selection_recall"], 0.75);
    assert_eq!(v["config"]["budget"]["k"], 5);
    assert_eq!(v["per_item"].as_array().unwrap().len(), 6);
}

#[test]
fn eval_reports_identical_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in ["1", "2", "5"] {
        let path = dir.path().join(format!("r{jobs}.json"));
        let o = plotqa(&["eval", "--data", "fixtures/mini", "--jobs", jobs, "--out", path_str(&path)]);
        assert!(o.status.success(), "{}", stderr(&o));
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[data]\npath = \"fixtures/mini\"\n\n[budget]\nk = 2\nmax_tokens = 40\n\n[output]\nformat = \"csv\"\n",
    )
    .unwrap();
    let from_file = dir.path().join("a.json");
    let o = plotqa(&["eval", "--config", path_str(&cfg), "--report-format", "json", "--out", path_str(&from_file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&from_file).unwrap()).unwrap();
    assert_eq!(v["config"]["budget"]["k"], 2);
    assert_eq!(v["config"]["budget"]["max_tokens"], 40);

    let overridden = dir.path().join("b.json");
    let o = plotqa(&[
        "eval", "--config", path_str(&cfg), "--k", "4", "--report-format", "json", "--out", path_str(&overridden),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&overridden).unwrap()).unwrap();
    assert_eq!(v["config"]["budget"]["k"], 4);
    assert_eq!(v["config"]["budget"]["max_tokens"], 40);
    assert!(v["per_item"][0]["selected_indices"].as_array().unwrap().len() == 4);
}

#[test]
fn csv_and_predictions_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let preds = dir.path().join("p.jsonl");
    let o = plotqa(&[
        "eval", "--data", "fixtures/official", "--format", "movieqa_official", "--split", "test",
        "--report-format", "csv", "--out", path_str(&csv), "--predictions", path_str(&preds),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("no labeled items"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 2);
    let line = std::fs::read_to_string(&preds).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["qid"], "test:1");
    assert_eq!(v["predicted_index"], 2);
}

#[test]
fn answer_unknown_qid_fails() {
    let o = plotqa(&["answer", "--data", "fixtures/mini", "--qid", "missing"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown qid"), "{}", stderr(&o));
}

#[test]
fn answer_json() {
    let o = plotqa(&["answer", "--data", "fixtures/mini", "--qid", "val:02", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["predicted_index"], 1);
    assert_eq!(v["predicted_choice"], "A shrimping boat");
}

#[test]
fn trace_marks_missed_gold() {
    let o = plotqa(&["trace", "--data", "fixtures/mini", "--qid", "val:03"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("missed gold sentences: [9]"), "{text}");
    assert!(text.contains("verdict: wrong"));
    assert_eq!(text.lines().filter(|l| l.starts_with("  *")).count(), 5);

    let o = plotqa(&["trace", "--data", "fixtures/mini", "--qid", "val:01", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_correct"], true);
    assert_eq!(v["sentences"].as_array().unwrap().len(), 12);
}

#[test]
fn select_exports_contexts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ctx.jsonl");
    let o = plotqa(&["select", "--data", "fixtures/mini", "--k", "3", "--max-tokens", "20", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["sentence_indices"].as_array().unwrap().len(), 3);
        assert!(v["real_token_count"].as_u64().unwrap() <= 20);
    }

    let o = plotqa(&["select", "--data", "fixtures/mini", "--qid", "val:04"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn ingest_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let o = plotqa(&["ingest", "--data", "fixtures/official", "--out", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for split in ["train", "val", "test"] {
        assert!(dir.path().join(split).join("items.jsonl").exists());
        assert!(dir.path().join(split).join("documents.jsonl").exists());
    }
    let train = dir.path().join("train");
    let o = plotqa(&["stats", "--data", path_str(&train), "--split", "train", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["num_questions"], 3);
    assert_eq!(v[0]["num_movies"], 2);
}

#[test]
fn user_errors_exit_one() {
    let cases: &[&[&str]] = &[
        &["eval", "--bogus"],
        &["frobnicate"],
        &["eval", "--data", "fixtures/mini", "--reader", "nope"],
        &["eval", "--data", "does/not/exist"],
        &["eval"],
        &["eval", "--data", "fixtures/mini", "--k", "0"],
        &["eval", "--data", "fixtures/mini", "--split", "holdout"],
        &["eval", "--config", "missing.toml"],
    ];
    for args in cases {
        let o = plotqa(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty(), "{args:?}: no diagnostic");
    }
}

#[test]
fn diagnostics_are_distinct() {
    let msgs: Vec<String> = [
        &["eval", "--data", "fixtures/mini", "--reader", "nope"][..],
        &["eval", "--data", "does/not/exist"],
        &["eval", "--config", "missing.toml"],
    ]
    .iter()
    .map(|a| stderr(&plotqa(a)))
    .collect();
    assert!(msgs[0].contains("reader"));
    assert!(msgs[1].contains("does/not/exist"));
    assert!(msgs[2].contains("missing.toml"));
}

#[test]
fn help_and_version_succeed() {
    assert!(plotqa(&["--help"]).status.success());
    assert!(plotqa(&["--version"]).status.success());
    let o = plotqa(&["eval", "--help"]);
    assert!(stdout(&o).contains("--max-tokens"));
}

#[test]
fn embed_url_env_is_used_for_remote_provider() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("remote.toml");
    std::fs::write(
        &cfg,
        "[[similarity.members]]\nmetric = \"cosine\"\nprovider = \"remote\"\n",
    )
    .unwrap();
    let o = plotqa(&["eval", "--config", path_str(&cfg), "--data", "fixtures/mini"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("PLOTQA_EMBED_URL"), "{}", stderr(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_plotqa"))
        .args(["eval", "--config", path_str(&cfg), "--data", "fixtures/mini"])
        .current_dir(workspace())
        .env("PLOTQA_EMBED_URL", "http://127.0.0.1:1")
        .output()
        .unwrap();
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("127.0.0.1:1"), "{}", stderr(&o));
}
