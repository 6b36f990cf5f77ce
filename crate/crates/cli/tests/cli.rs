use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fuzzmem(dir: &TempDir, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzmem")).current_dir(dir.path()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "clean.txt", "Close the valve.\n");
    write(&dir, "empty.txt", "");
    write(&dir, "fuzzy.txt", "Progressively heat the probe.\n");
    assert_eq!(fuzzmem(&dir, &["detect", "clean.txt"]).status.code(), Some(0));
    assert_eq!(fuzzmem(&dir, &["detect", "empty.txt"]).status.code(), Some(0));
    let o = fuzzmem(&dir, &["detect", "fuzzy.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("item=progressively"));
    assert_eq!(fuzzmem(&dir, &["detect", "missing.txt"]).status.code(), Some(2));
    assert_eq!(fuzzmem(&dir, &["validate", "ctx:nope"]).status.code(), Some(2));
    assert_eq!(fuzzmem(&dir, &["--set", "no_such_key=1", "detect", "clean.txt"]).status.code(), Some(2));
}

#[test]
fn min_severity_gates_the_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    // "regularly" is a severity 2 item
    write(&dir, "d.txt", "Regularly inspect the landing gear.\n");
    assert_eq!(fuzzmem(&dir, &["detect", "d.txt"]).status.code(), Some(1));
    let o = fuzzmem(&dir, &["--min-severity", "3", "detect", "d.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("at_or_above_min=0"));
}

#[test]
fn detect_never_writes_the_store() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "d.txt", "Progressively heat the probe.\n");
    fuzzmem(&dir, &["detect", "d.txt"]);
    assert!(!dir.path().join("fuzzmem.jsonl").exists());

    fuzzmem(&dir, &["learn", "d.txt", "d.txt", "--writer", "w"]);
    let before = std::fs::read(dir.path().join("fuzzmem.jsonl")).unwrap();
    fuzzmem(&dir, &["detect", "d.txt"]);
    fuzzmem(&dir, &["suggest", "d.txt"]);
    assert_eq!(std::fs::read(dir.path().join("fuzzmem.jsonl")).unwrap(), before);
}

#[test]
fn stable_output_is_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        write(&dir, "o.txt", "Progressively heat the probe.\n");
        write(&dir, "c.txt", "Progressively heat the probe in 5 seconds.\n");
        fuzzmem(&dir, &["--stable-output", "learn", "o.txt", "c.txt", "--writer", "w"]);
        fuzzmem(&dir, &["--stable-output", "induce"]);
        let main = std::fs::read(dir.path().join("fuzzmem.jsonl")).unwrap();
        let derived = std::fs::read(dir.path().join("fuzzmem.jsonl.derived")).unwrap();
        (main, derived)
    };
    assert_eq!(run(), run());
}

#[test]
fn learn_suggest_round() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "o.txt", "Progressively heat the probe.\n");
    write(&dir, "c.txt", "Progressively heat the probe in 5 seconds.\n");
    write(&dir, "q.txt", "Then progressively heat the probe.\n");
    write(&dir, "other.txt", "Progressively close the pipe.\n");
    let o = fuzzmem(&dir, &["learn", "o.txt", "c.txt", "--writer", "w"]);
    assert!(stdout(&o).contains("summary=learn\trecords=1\tcase1=0\tcase2=1"), "{}", stdout(&o));
    fuzzmem(&dir, &["induce"]);
    let o = fuzzmem(&dir, &["suggest", "q.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("text=Then progressively heat the probe in 5 seconds.\tfillers=in 5 seconds@1"),
        "{}",
        stdout(&o)
    );
    // another context gets the bare rewrite with an open slot
    let o = fuzzmem(&dir, &["suggest", "other.txt"]);
    assert!(stdout(&o).contains("fillers=\n"), "{}", stdout(&o));
}

#[test]
fn learn_rejects_mismatched_sentences() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "o.txt", "Progressively heat the probe. Close the valve.\n");
    write(&dir, "c.txt", "Heat the probe in 5 seconds.\n");
    let o = fuzzmem(&dir, &["learn", "o.txt", "c.txt", "--writer", "w"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("fuzzmem.jsonl").exists());
}

#[test]
fn report_lists_cases_and_frequency() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "d.txt", "Progressively heat the probe.\nClose the valve.\n");
    let o = fuzzmem(&dir, &["report", "--corpus", "d.txt"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    assert!(text.contains("section=frequency\talerts=1\tlines=2\tper_1000_lines=500.0"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("section=case")).count(), 5);
    assert_eq!(fuzzmem(&tempfile::tempdir().unwrap(), &["report"]).status.code(), Some(2));
}

#[test]
fn a_held_lock_blocks_writers() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "d.txt", "Progressively heat the probe.\n");
    write(&dir, "fuzzmem.jsonl.lock", "");
    let o = fuzzmem(&dir, &["learn", "d.txt", "d.txt", "--writer", "w"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("locked"));
    // readers ignore the lock
    assert_eq!(fuzzmem(&dir, &["detect", "d.txt"]).status.code(), Some(1));
}

#[test]
fn annotate_dir_marks_items() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "d.txt", "Progressively heat the probe.\n");
    fuzzmem(&dir, &["detect", "d.txt", "--annotate-dir", "out"]);
    let marked = std::fs::read_to_string(dir.path().join("out/d.txt.annotated")).unwrap();
    assert!(marked.contains("<fuzzy "), "{marked}");
}
