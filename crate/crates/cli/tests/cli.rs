use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn neurograph(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_neurograph"));
    cmd.args(args).env("RUST_LOG", "warn");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn synthetic_config(dir: &Path, extra: &str) -> String {
    config_with_cap(dir, 100, extra)
}

fn config_with_cap(dir: &Path, cap: usize, extra: &str) -> String {
    let path = dir.join(format!("config_{cap}.json"));
    fs::write(
        &path,
        format!(
            r#"{{
  "schema": "neurograph.experiment/v1",
  "seed": 4,
  "dataset": {{ "source": "synthetic", "class_count": 4, "per_class": 50, "dim": 10, "spread": 0.4 }},
  "architecture": {{ "hidden_sizes": [16, 12] }},
  "training": {{ "epochs": 2, "batch_size": 16, "learning_rate": 0.1 }},
  "snapshot_count": 3,
  "capture_cap": {cap},
  "neurons_per_class": 5{extra}
}}"#
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn run_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = neurograph(&["run", "--config", &config, "--out", out.to_str().unwrap()], &[("NEUROGRAPH_THREADS", "2")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("3 snapshots"), "{stdout}");
    for f in ["accuracy.csv", "modularity.csv", "entropy.csv", "correlations.csv", "snapshots/manifest.json", "snapshots/snapshot_03.ngmdl"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(out.join("modularity.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("snapshot,layer,metric,value"));
}

#[test]
fn output_dir_from_config_is_relative_to_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path(), r#", "output_dir": "results""#);
    let o = neurograph(&["run", "--config", &config], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("results/accuracy.csv").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path(), "");
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        assert_eq!(code(&neurograph(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--seed", seed], &[])), 0);
        fs::read(out.join("snapshots/snapshot_03.ngmdl")).unwrap()
    };
    assert_eq!(run("9", "a"), run("9", "b"));
    assert_ne!(run("9", "a"), run("10", "c"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&neurograph(&["run", "--config", missing.to_str().unwrap()], &[])), 2);

    let bad_schema = dir.path().join("bad.json");
    fs::write(&bad_schema, fs::read_to_string(synthetic_config(dir.path(), "")).unwrap().replace("/v1", "/v9")).unwrap();
    let o = neurograph(&["run", "--config", bad_schema.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));

    let unknown = synthetic_config(dir.path(), r#", "bins": 3"#);
    assert_eq!(code(&neurograph(&["run", "--config", &unknown], &[])), 2);

    let config = synthetic_config(dir.path(), "");
    assert_eq!(code(&neurograph(&["run", "--config", &config], &[("NEUROGRAPH_THREADS", "zero")])), 2);
    assert_eq!(code(&neurograph(&["run"], &[])), 2);
    assert_eq!(code(&neurograph(&["inspect-graph", "--layer", "1", "--snapshot", "1", "--snapshots", dir.path().to_str().unwrap()], &[])), 2);
}

#[test]
fn pipeline_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("idx.json");
    fs::write(
        &path,
        r#"{"schema":"neurograph.experiment/v1","seed":1,
            "dataset":{"source":"idx","train_images":"none-a","train_labels":"none-b","test_images":"none-c","test_labels":"none-d"},
            "architecture":{"hidden_sizes":[4]}}"#,
    )
    .unwrap();
    let o = neurograph(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dataset failed"));

    // Fewer captured samples than classes.
    let tiny = config_with_cap(dir.path(), 2, "");
    let o = neurograph(&["run", "--config", &tiny, "--out", dir.path().join("p").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capture failed at snapshot 1"));
}

#[test]
fn metrics_and_inspect_read_a_snapshot_dir() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path(), r#", "persist_activations": true"#);
    let out = dir.path().join("out");
    assert_eq!(code(&neurograph(&["run", "--config", &config, "--out", out.to_str().unwrap()], &[])), 0);
    assert!(out.join("activations/snapshot_01.ngact").exists());
    let snaps = out.join("snapshots");
    let again = dir.path().join("again");
    let o = neurograph(&["metrics", "--snapshots", snaps.to_str().unwrap(), "--out", again.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["modularity.csv", "entropy.csv", "correlations.csv", "accuracy.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
    let o = neurograph(&["inspect-graph", "--layer", "2", "--snapshot", "3", "--snapshots", snaps.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("layer 2 snapshot 3\nnodes "), "{text}");
    let o = neurograph(&["inspect-graph", "--layer", "3", "--snapshot", "1", "--snapshots", snaps.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
}
