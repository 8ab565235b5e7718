use std::fs;
use std::path::Path;

use clap::Parser;
use clinprobe::cli::{run, Cli, RunLog};
use clinprobe::mock::{MockProfile, MockServer};

/// Exit code of a command line run in-process.
fn exit(args: &[&str]) -> u8 {
    let cli = Cli::try_parse_from(std::iter::once("clinprobe").chain(args.iter().copied())).expect("arguments parse");
    match run(cli) {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Generates a corpus, parses it and writes a gender manifest into `dir`.
fn manifest(dir: &Path, n: &str) {
    let d = p(dir);
    assert_eq!(exit(&["gen-corpus", "--n", n, "--seed", "4", "--out-dir", d]), 0);
    let notes = dir.join("notes.jsonl");
    assert_eq!(exit(&["parse", p(&notes), "--out-dir", d]), 0);
    let parsed = dir.join("parsed.jsonl");
    assert_eq!(exit(&["counterfact", p(&parsed), "--variables", "gender", "--seed", "4", "--settings", "raw", "--out-dir", d]), 0);
}

#[test]
fn empty_notes_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    assert_eq!(exit(&["parse", p(&empty), "--out-dir", p(dir.path())]), 2);
    assert_eq!(exit(&["parse", p(&dir.path().join("absent.jsonl")), "--out-dir", p(dir.path())]), 2);
}

#[test]
fn skip_errors_keeps_good_notes() {
    let dir = tempfile::tempdir().unwrap();
    let notes = dir.path().join("notes.jsonl");
    fs::write(
        &notes,
        "{\"note_id\":\"a\",\"text\":\"PHYSICAL EXAM:\\nHR: 80\"}\n{\"note_id\":\"b\",\"text\":\"no headers here\"}\n",
    )
    .unwrap();
    let d = p(dir.path());
    assert_eq!(exit(&["parse", p(&notes), "--out-dir", d]), 2);
    assert_eq!(exit(&["parse", p(&notes), "--skip-errors", "--out-dir", d]), 0);
    assert_eq!(fs::read_to_string(dir.path().join("parsed.jsonl")).unwrap().lines().count(), 1);
    let errors = fs::read_to_string(dir.path().join("parse_errors.jsonl")).unwrap();
    assert_eq!(errors.lines().count(), 1);
    assert!(errors.contains("\"b\""));
}

#[test]
fn unknown_variable_and_missing_seed() {
    let dir = tempfile::tempdir().unwrap();
    manifest(dir.path(), "3");
    let parsed = dir.path().join("parsed.jsonl");
    let d = p(dir.path());
    assert_eq!(exit(&["counterfact", p(&parsed), "--variables", "pulse", "--seed", "1", "--out-dir", d]), 2);
    assert_eq!(exit(&["counterfact", p(&parsed), "--variables", "gender", "--out-dir", d]), 2);
    assert_eq!(exit(&["counterfact", p(&parsed), "--settings", "raw,synthetic", "--seed", "1", "--out-dir", d]), 2);
}

#[test]
fn counterfact_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(exit(&["gen-corpus", "--n", "4", "--seed", "6", "--out-dir", p(dir)]), 0);
        let notes = dir.join("notes.jsonl");
        // raw notes are accepted directly
        assert_eq!(exit(&["counterfact", p(&notes), "--variables", "age,temperature", "--seed", "6", "--out-dir", p(dir)]), 0);
    }
    for name in ["manifest.jsonl", "quarantine.jsonl", "counterfact_summary.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let d = p(a.path());
    let m = a.path().join("manifest.jsonl");
    assert_eq!(exit(&["validate", p(&m), "--strict", "--out-dir", d]), 0);
    assert_eq!(exit(&["parse", p(&a.path().join("notes.jsonl")), "--out-dir", d]), 0);
    assert_eq!(exit(&["template", p(&a.path().join("parsed.jsonl")), "--out-dir", d]), 0);
    assert_eq!(fs::read_to_string(a.path().join("templates.jsonl")).unwrap().lines().count(), 4);
}

#[test]
fn unreachable_endpoint_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    manifest(dir.path(), "3");
    let m = dir.path().join("manifest.jsonl");
    // nothing listens on the discard port
    let code = exit(&[
        "eval", p(&m), "--endpoint", "http://127.0.0.1:9", "--max-retries", "0", "--timeout-ms", "500", "--out-dir", p(dir.path()),
    ]);
    assert_eq!(code, 3);
    let log: RunLog = serde_json::from_str(&fs::read_to_string(dir.path().join("run_log.json")).unwrap()).unwrap();
    assert!(log.aborted);
    assert_eq!(log.records, 0);
    assert_eq!(log.errors, 3);
}

#[test]
fn eval_then_report() {
    let dir = tempfile::tempdir().unwrap();
    manifest(dir.path(), "6");
    let server = MockServer::start(MockProfile::SeverityOracle { beta: 1.0 }, 0).unwrap();
    let d = p(dir.path());
    let m = dir.path().join("manifest.jsonl");
    let notes = dir.path().join("notes.jsonl");
    assert_eq!(exit(&["eval", p(&m), "--endpoint", &server.url(), "--notes", p(&notes), "--concurrency", "3", "--out-dir", d]), 0);
    let log: RunLog = serde_json::from_str(&fs::read_to_string(dir.path().join("run_log.json")).unwrap()).unwrap();
    assert_eq!((log.pairs, log.records, log.errors), (6, 6, 0));
    assert!(!log.aborted);

    let records = dir.path().join("records.jsonl");
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert_eq!(exit(&["report", p(&records), "--out-dir", p(&first)]), 0);
    assert_eq!(exit(&["report", p(&records), "--out-dir", p(&second)]), 0);
    for name in ["summary.csv", "severity.json", "vital_jsd.json", "demographics.json"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
    assert_eq!(exit(&["report", p(&records), "--reference-days", "1,2,3", "--out-dir", p(&first)]), 2);
    assert_eq!(exit(&["report", p(&records), "--group-by", "color", "--out-dir", p(&first)]), 2);
}

#[test]
fn report_on_empty_records() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.jsonl");
    fs::write(&records, "").unwrap();
    assert_eq!(exit(&["report", p(&records), "--out-dir", p(dir.path())]), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("seed = 12\nout_dir = {:?}\nvariables = [\"gender\"]\n", p(dir.path()))).unwrap();
    assert_eq!(exit(&["--config", p(&cfg), "gen-corpus", "--n", "2"]), 0);
    let notes = dir.path().join("notes.jsonl");
    assert_eq!(exit(&["--config", p(&cfg), "counterfact", p(&notes)]), 0);
    let summary = fs::read_to_string(dir.path().join("counterfact_summary.json")).unwrap();
    assert!(summary.contains("gender") && !summary.contains("heart_rate"));

    fs::write(&cfg, "sede = 12\n").unwrap();
    assert_eq!(exit(&["--config", p(&cfg), "gen-corpus", "--n", "2", "--seed", "1"]), 2);
}
