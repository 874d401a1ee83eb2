//! End-to-end tests of the command-line surface: flag validation exit
//! codes, the file-chained pipeline, and input immutability.

use std::path::Path;
use std::process::{Command, Output};

fn exq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exq"))
}

fn run(args: &[&str]) -> Output {
    exq().args(args).output().expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small generated dataset shared by the pipeline tests.
fn small_raw(dir: &Path) -> String {
    let raw = dir.join("raw.jsonl").display().to_string();
    let out = run(&[
        "generate", "--exercise", "blast-off", "--subjects", "2", "--pos", "5,5", "--neg", "5,5",
        "--seed", "11", "--out", &raw,
    ]);
    assert_success(&out);
    raw
}

#[test]
fn pipeline_chains_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let raw = small_raw(dir.path());
    let prep = dir.path().join("prep.jsonl").display().to_string();
    let features = dir.path().join("features.csv").display().to_string();
    let model = dir.path().join("model.json").display().to_string();
    let report = dir.path().join("report.json").display().to_string();
    let roc = dir.path().join("roc.csv").display().to_string();

    assert_success(&run(&["preprocess", "--in", &raw, "--out", &prep]));
    assert_success(&run(&[
        "featurize", "--in", &prep, "--rep", "angle-time", "--out", &features,
    ]));
    assert_success(&run(&[
        "train", "--features", &features, "--model", "adaboost", "--rep", "angle-time",
        "--rounds", "30", "--out", &model,
    ]));
    assert_success(&run(&[
        "eval", "--data", &prep, "--rep", "angle-time", "--model", "adaboost", "--rounds", "30",
        "--protocol", "random:14", "--runs", "3", "--seed", "5", "--out", &report, "--roc", &roc,
    ]));

    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.contains("\"mean_accuracy\""));
    let roc_text = std::fs::read_to_string(&roc).unwrap();
    assert!(roc_text.starts_with("threshold,fpr,tpr"));

    // the roc subcommand reproduces the eval-written curve
    let roc2 = dir.path().join("roc2.csv").display().to_string();
    assert_success(&run(&["roc", "--report", &report, "--out", &roc2]));
    assert_eq!(
        std::fs::read(&roc).unwrap(),
        std::fs::read(&roc2).unwrap()
    );
}

#[test]
fn subcommands_do_not_mutate_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let raw = small_raw(dir.path());
    let before = std::fs::read(&raw).unwrap();
    let prep = dir.path().join("prep.jsonl").display().to_string();
    assert_success(&run(&["preprocess", "--in", &raw, "--out", &prep]));
    assert_eq!(std::fs::read(&raw).unwrap(), before);

    let prep_before = std::fs::read(&prep).unwrap();
    let features = dir.path().join("f.csv").display().to_string();
    assert_success(&run(&[
        "featurize", "--in", &prep, "--rep", "joint-time", "--out", &features,
    ]));
    assert_eq!(std::fs::read(&prep).unwrap(), prep_before);
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl").display().to_string();
    let b = dir.path().join("b.jsonl").display().to_string();
    let c = dir.path().join("c.jsonl").display().to_string();
    for (path, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        assert_success(&run(&[
            "generate", "--subjects", "1", "--pos", "2", "--neg", "2", "--seed", seed, "--out",
            path,
        ]));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn holdout_with_multiple_runs_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let raw = small_raw(dir.path());
    let prep = dir.path().join("prep.jsonl").display().to_string();
    assert_success(&run(&["preprocess", "--in", &raw, "--out", &prep]));
    let out = run(&[
        "eval", "--data", &prep, "--rep", "angle-time", "--model", "dtw", "--protocol",
        "holdout:1/2", "--runs", "51", "--out", "unused.json",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("--runs"));
}

#[test]
fn dimension_mismatch_exits_1_naming_both_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let raw = small_raw(dir.path());
    let prep = dir.path().join("prep.jsonl").display().to_string();
    let features = dir.path().join("f.csv").display().to_string();
    assert_success(&run(&["preprocess", "--in", &raw, "--out", &prep]));
    assert_success(&run(&[
        "featurize", "--in", &prep, "--rep", "angle-time", "--out", &features,
    ]));
    // declare joint-time (9600) against 1600-dimensional angle features
    let out = run(&[
        "train", "--features", &features, "--model", "svm", "--rep", "joint-time", "--out",
        "unused.json",
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("1600"), "{err}");
    assert!(err.contains("9600"), "{err}");
}

#[test]
fn dtw_on_frequency_rep_exits_2() {
    let out = run(&[
        "eval", "--data", "whatever.jsonl", "--rep", "joint-freq", "--model", "dtw",
        "--protocol", "random:10", "--runs", "1", "--out", "unused.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_exercise_exits_2() {
    let out = run(&[
        "generate", "--exercise", "jumping", "--subjects", "1", "--pos", "2", "--neg", "2",
        "--out", "unused.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("jumping"));
}

#[test]
fn eval_on_raw_data_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let raw = small_raw(dir.path());
    let out = run(&[
        "eval", "--data", &raw, "--rep", "angle-time", "--model", "dtw", "--protocol",
        "random:10", "--runs", "1", "--out", "unused.json",
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("preprocess"));
}

#[test]
fn reproduce_into_readonly_dir_fails_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let locked = dir.path().join("locked");
    std::fs::create_dir(&locked).unwrap();
    let mut perms = std::fs::metadata(&locked).unwrap().permissions();
    perms.set_readonly(true);
    std::fs::set_permissions(&locked, perms.clone()).unwrap();

    // a privileged user bypasses the permission bits; nothing to test then
    if std::fs::File::create(locked.join(".probe")).is_ok() {
        std::fs::remove_file(locked.join(".probe")).unwrap();
        perms.set_readonly(false);
        std::fs::set_permissions(&locked, perms).unwrap();
        eprintln!("skipping: filesystem permissions not enforced for this user");
        return;
    }

    let target = locked.join("results").display().to_string();
    let out = run(&["reproduce", "--out", &target]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(std::fs::read_dir(&locked).unwrap().next().is_none());

    perms.set_readonly(false);
    std::fs::set_permissions(&locked, perms).unwrap();
}

#[test]
fn csv_format_round_trips_through_preprocess() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv").display().to_string();
    assert_success(&run(&[
        "generate", "--format", "csv", "--subjects", "1", "--pos", "2", "--neg", "2", "--seed",
        "2", "--out", &raw,
    ]));
    let prep = dir.path().join("prep.csv").display().to_string();
    assert_success(&run(&["preprocess", "--format", "csv", "--in", &raw, "--out", &prep]));
    let text = std::fs::read_to_string(&prep).unwrap();
    assert!(text.starts_with("subject_id,exercise,label,sample_idx,frame_idx,j0x"));
}
