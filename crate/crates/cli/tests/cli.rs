//! Black-box tests of the `mdwm` binary: flag handling, exit codes,
//! determinism of the written artifacts, and the documented example
//! invocations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mdwm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdwm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary launches")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Generate the small test dataset (4 subjects, 3 classes) into `name`.
fn generate_small(dir: &Path, name: &str) {
    let output = mdwm(
        dir,
        &[
            "generate",
            "--out",
            name,
            "--subjects",
            "4",
            "--classes",
            "3",
            "--channels",
            "4",
            "--samples",
            "48",
            "--trials-per-class",
            "8",
        ],
    );
    assert_exit(&output, 0);
}

/// All files of a directory as sorted (name, bytes) pairs.
fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|entry| {
            let entry = entry.unwrap();
            let name = entry.file_name().into_string().unwrap();
            let bytes = fs::read(entry.path()).unwrap();
            (name, bytes)
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn generate_reruns_write_identical_directories() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "first");
    generate_small(tmp.path(), "second");
    let first = dir_contents(&tmp.path().join("first"));
    let second = dir_contents(&tmp.path().join("second"));
    assert!(!first.is_empty());
    assert_eq!(
        first
            .iter()
            .map(|(name, _)| name.as_str())
            .collect::<Vec<_>>(),
        second
            .iter()
            .map(|(name, _)| name.as_str())
            .collect::<Vec<_>>(),
    );
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        assert_eq!(a, b, "file {name} differs between identical invocations");
    }
}

#[test]
fn generate_without_out_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let output = mdwm(tmp.path(), &["generate"]);
    assert_exit(&output, 1);
    assert!(stderr(&output).contains("--out"));
}

#[test]
fn single_class_datasets_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let output = mdwm(tmp.path(), &["generate", "--out", "ds", "--classes", "1"]);
    assert_exit(&output, 1);
    assert!(stderr(&output).contains("classes"), "{}", stderr(&output));
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = TempDir::new().unwrap();
    let help = mdwm(tmp.path(), &["--help"]);
    assert_exit(&help, 0);
    for subcommand in ["generate", "eval", "meta"] {
        assert!(stdout(&help).contains(subcommand));
    }
    assert_exit(&mdwm(tmp.path(), &["--version"]), 0);
}

#[test]
fn the_documented_example_writes_320_rows() {
    let tmp = TempDir::new().unwrap();
    // Default generation: 8 subjects. 8 subjects x 1 n x 2 lambda x 10 reps
    // x 2 pipelines = 320 rows.
    assert_exit(&mdwm(tmp.path(), &["generate", "--out", "ds"]), 0);
    let output = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "scores.csv",
            "--lambda",
            "0",
            "--lambda",
            "0.7",
            "--n",
            "8",
            "--reps",
            "10",
        ],
    );
    assert_exit(&output, 0);
    let table = fs::read_to_string(tmp.path().join("scores.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 320);
    assert!(table.starts_with(
        "dataset,subject,pipeline,n_train,lambda,repetition,balanced_accuracy,train_seconds,test_seconds\n"
    ));
}

#[test]
fn scores_and_provenance_are_byte_identical_across_reruns_and_worker_counts() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    let eval = |out: &str, jobs: &str| {
        let output = mdwm(
            tmp.path(),
            &[
                "eval",
                "--dataset",
                "ds",
                "--out",
                out,
                "--n",
                "6",
                "--lambda",
                "0",
                "--lambda",
                "0.7",
                "--reps",
                "3",
                "--jobs",
                jobs,
            ],
        );
        assert_exit(&output, 0);
    };
    eval("a.csv", "1");
    eval("b.csv", "1");
    eval("c.csv", "8");
    let a = fs::read(tmp.path().join("a.csv")).unwrap();
    let b = fs::read(tmp.path().join("b.csv")).unwrap();
    let c = fs::read(tmp.path().join("c.csv")).unwrap();
    assert_eq!(a, b, "rerun changed the table");
    assert_eq!(a, c, "worker count changed the table");
    let pa = fs::read(tmp.path().join("a.provenance.json")).unwrap();
    let pc = fs::read(tmp.path().join("c.provenance.json")).unwrap();
    assert_eq!(pa, pc, "worker count leaked into provenance");
}

#[test]
fn a_config_file_means_the_same_as_the_flags() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    fs::write(
        tmp.path().join("protocol.toml"),
        "n = [6]\nlambda = [0.0, 0.7]\nreps = 2\nseed = 11\n",
    )
    .unwrap();
    let from_file = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "file.csv",
            "--config",
            "protocol.toml",
        ],
    );
    assert_exit(&from_file, 0);
    let from_flags = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "flags.csv",
            "--n",
            "6",
            "--lambda",
            "0",
            "--lambda",
            "0.7",
            "--reps",
            "2",
            "--seed",
            "11",
        ],
    );
    assert_exit(&from_flags, 0);
    assert_eq!(
        fs::read(tmp.path().join("file.csv")).unwrap(),
        fs::read(tmp.path().join("flags.csv")).unwrap(),
    );
}

#[test]
fn config_and_flag_for_the_same_key_conflict() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    fs::write(tmp.path().join("protocol.toml"), "seed = 11\n").unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "x.csv",
            "--seed",
            "7",
            "--config",
            "protocol.toml",
        ],
    );
    assert_exit(&output, 1);
    let message = stderr(&output);
    assert!(
        message.contains("seed") && message.contains("both"),
        "{message}"
    );
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    fs::write(tmp.path().join("protocol.toml"), "lambdas = [0.5]\n").unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "x.csv",
            "--config",
            "protocol.toml",
        ],
    );
    assert_exit(&output, 1);
    assert!(stderr(&output).contains("lambdas"), "{}", stderr(&output));
}

#[test]
fn paper_defaults_conflicts_with_explicit_grids() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    let output = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "x.csv",
            "--paper-defaults",
            "--lambda",
            "0.5",
        ],
    );
    assert_exit(&output, 1);
}

#[test]
fn paper_defaults_clips_infeasible_sizes_and_adds_the_operating_point() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    // 3 classes x 8 trials: n = 5 is feasible, 30 and 55 are not; the
    // operating point adds n = 2 * 3 = 6.
    let output = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "pd.csv",
            "--paper-defaults",
        ],
    );
    assert_exit(&output, 0);
    let table = fs::read_to_string(tmp.path().join("pd.csv")).unwrap();
    let mut n_values: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(3).unwrap())
        .collect();
    n_values.sort_unstable();
    n_values.dedup();
    assert_eq!(n_values, ["5", "6"]);
}

#[test]
fn explicit_infeasible_n_reports_per_subject_capacities() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    let output = mdwm(
        tmp.path(),
        &["eval", "--dataset", "ds", "--out", "x.csv", "--n", "23"],
    );
    assert_exit(&output, 1);
    let message = stderr(&output);
    assert!(
        message.contains("per-class trial counts") && message.contains("subject_01"),
        "{message}"
    );
}

#[test]
fn erp_and_band_flags_conflict() {
    let tmp = TempDir::new().unwrap();
    generate_small(tmp.path(), "ds");
    let output = mdwm(
        tmp.path(),
        &[
            "eval",
            "--dataset",
            "ds",
            "--out",
            "x.csv",
            "--erp-prototype",
            "class_0",
            "--band",
            "4:12",
        ],
    );
    assert_exit(&output, 1);
}

#[test]
fn missing_dataset_directory_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let output = mdwm(
        tmp.path(),
        &["eval", "--dataset", "absent", "--out", "x.csv"],
    );
    assert_exit(&output, 3);
}

/// Score table where `mdwm` beats the baseline for every one of 12
/// subjects: the one-sided signed-rank p is 2^-12 ≈ 2.44e-4, under the
/// 0.001 three-star threshold.
fn dominance_table() -> String {
    let mut csv = String::from(
        "dataset,subject,pipeline,n_train,lambda,repetition,balanced_accuracy,train_seconds,test_seconds\n",
    );
    for subject in 0..12 {
        let winner = 0.70 + 0.01 * subject as f64;
        csv.push_str(&format!(
            "fixture,s{subject:02},mdwm,8,0.7,0,{winner},0,0\n"
        ));
        csv.push_str(&format!(
            "fixture,s{subject:02},mdm-target-only,8,0.7,0,0.5,0,0\n"
        ));
    }
    csv
}

#[test]
fn meta_dominance_earns_three_stars() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("scores.csv"), dominance_table()).unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "meta",
            "--scores",
            "scores.csv",
            "--n",
            "8",
            "--lambda",
            "0.7",
            "--out",
            "summary.csv",
        ],
    );
    assert_exit(&output, 0);
    assert!(stdout(&output).contains("***"), "{}", stdout(&output));
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let combined = summary
        .lines()
        .find(|line| line.starts_with("combined,"))
        .expect("combined line");
    assert!(combined.ends_with(",***"), "{combined}");
    assert!(tmp.path().join("summary.provenance.json").exists());
}

#[test]
fn meta_on_a_single_dataset_reports_the_dataset_p_as_combined() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("scores.csv"), dominance_table()).unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "meta",
            "--scores",
            "scores.csv",
            "--n",
            "8",
            "--lambda",
            "0.7",
            "--out",
            "summary.csv",
        ],
    );
    assert_exit(&output, 0);
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let field = |line: &str, index: usize| line.split(',').nth(index).unwrap().to_owned();
    let dataset_line = summary.lines().nth(1).unwrap();
    let combined_line = summary.lines().nth(2).unwrap();
    assert_eq!(field(dataset_line, 0), "fixture");
    assert_eq!(field(combined_line, 0), "combined");
    assert_eq!(
        field(dataset_line, 3),
        field(combined_line, 3),
        "single-dataset combined p must equal the dataset p"
    );
}

#[test]
fn meta_with_identical_methods_fails_as_zero_variance() {
    let tmp = TempDir::new().unwrap();
    // Same per-subject scores under both method names: every paired
    // difference is exactly zero.
    let mut csv = String::from(
        "dataset,subject,pipeline,n_train,lambda,repetition,balanced_accuracy,train_seconds,test_seconds\n",
    );
    for subject in 0..6 {
        let score = 0.60 + 0.02 * subject as f64;
        for method in ["mdwm", "mdm-target-only"] {
            csv.push_str(&format!(
                "fixture,s{subject:02},{method},8,0.7,0,{score},0,0\n"
            ));
        }
    }
    fs::write(tmp.path().join("scores.csv"), csv).unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "meta",
            "--scores",
            "scores.csv",
            "--n",
            "8",
            "--lambda",
            "0.7",
            "--out",
            "summary.csv",
        ],
    );
    assert_exit(&output, 2);
    assert!(
        stderr(&output).contains("zero variance"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn meta_on_an_absent_cell_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("scores.csv"), dominance_table()).unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "meta",
            "--scores",
            "scores.csv",
            "--n",
            "8",
            "--lambda",
            "0.3",
            "--out",
            "summary.csv",
        ],
    );
    assert_exit(&output, 1);
    assert!(stderr(&output).contains("no rows"), "{}", stderr(&output));
}

#[test]
fn meta_missing_scores_file_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let output = mdwm(
        tmp.path(),
        &[
            "meta",
            "--scores",
            "absent.csv",
            "--n",
            "8",
            "--lambda",
            "0.7",
            "--out",
            "s.csv",
        ],
    );
    assert_exit(&output, 3);
}
