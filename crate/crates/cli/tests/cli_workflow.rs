//! End-to-end CLI workflow on a small generated dataset.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netsoinn"))
}

fn mapping_path() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../config/attack_categories.tsv")
        .display()
        .to_string()
}

fn write_config(dir: &Path, out_dir: &Path) -> PathBuf {
    let config = format!(
        r#"
[data]
initial_path = "{initial}"
rounds_path = "{rounds}"
mapping_path = "{mapping}"

[experiment]
rounds = 2
seed = 7
zero_times = true

[engine]
n_pos = 2
n_neg = 50
m = 3

[engine.svm]
c = 4.0
max_passes = 5
max_iterations = 2000

[report]
format = "both"
out_dir = "{out}"
"#,
        initial = dir.join("data/initial.txt").display(),
        rounds = dir.join("data/rounds.txt").display(),
        mapping = mapping_path(),
        out = out_dir.display(),
    );
    let path = dir.join("experiment.toml");
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn full_workflow_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    let status = bin()
        .args(["gen-data", "--initial", "500", "--rounds", "600"])
        .args(["--seed", "3", "--out"])
        .arg(dir.path().join("data"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("data/initial.txt").exists());
    assert!(dir.path().join("data/rounds.txt").exists());

    let config = write_config(dir.path(), &out_dir);
    let output = bin()
        .args(["run-online", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "run-online failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    for artifact in [
        "online_report.csv",
        "online_report.json",
        "engine.snapshot.json",
        "training_digest.json",
    ] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }
    let csv = std::fs::read_to_string(out_dir.join("online_report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "header + rounds 0..2");

    let output = bin()
        .args(["run-offline", "--config"])
        .arg(&config)
        .arg("--training-digest")
        .arg(out_dir.join("training_digest.json"))
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "run-offline failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out_dir.join("offline_report.csv").exists());
    assert!(out_dir.join("offline_report.json").exists());

    let output = bin()
        .args(["inspect", "--model"])
        .arg(out_dir.join("engine.snapshot.json"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("positive nodes"));
    assert!(text.contains("pairwise models: 10"));

    let output = bin()
        .args(["predict", "--model"])
        .arg(out_dir.join("engine.snapshot.json"))
        .arg("--input")
        .arg(dir.path().join("data/initial.txt"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert_eq!(text.lines().count(), 501, "header plus one row per record");
    assert!(text.starts_with("record,predicted,score_normal"));
}

#[test]
fn exit_codes_distinguish_error_classes() {
    let dir = tempfile::tempdir().unwrap();

    // Missing config file: config error (2).
    let status = bin()
        .args(["run-online", "--config"])
        .arg(dir.path().join("nope.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Config pointing at missing data: data error (1).
    let config_path = dir.path().join("bad.toml");
    std::fs::write(
        &config_path,
        format!(
            "[data]\ninitial_path = \"{0}/missing.txt\"\nrounds_path = \"{0}/missing.txt\"\nmapping_path = \"{1}\"\n",
            dir.path().display(),
            mapping_path()
        ),
    )
    .unwrap();
    let status = bin()
        .args(["run-online", "--config"])
        .arg(&config_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // Invalid engine config (m out of range): config error (2).
    let config_path = dir.path().join("badm.toml");
    std::fs::write(
        &config_path,
        "[engine]\nm = 99\n[data]\ninitial_path = \"a\"\nrounds_path = \"b\"\nmapping_path = \"c\"\n",
    )
    .unwrap();
    let status = bin()
        .args(["run-online", "--config"])
        .arg(&config_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Corrupt model file: data error (1).
    let model = dir.path().join("model.json");
    std::fs::write(&model, "{\"version\":1,\"sha256\":\"00\",\"payload\":{}}").unwrap();
    let status = bin()
        .args(["inspect", "--model"])
        .arg(&model)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
