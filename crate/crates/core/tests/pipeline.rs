use std::fs;
use std::path::Path;
use std::time::Instant;

use neurograph::experiment::{analyze_snapshot_dir, inspect_graph, table5_runner, ExperimentConfig, LayerMetric};
use neurograph::run_experiment;

fn small_config(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::synthetic(4, 60, 12, 0.4, vec![24, 16], seed);
    c.training.epochs = 3;
    c.training.batch_size = 16;
    c.training.learning_rate = 0.1;
    c.snapshot_count = 4;
    c.capture_cap = 120;
    c.neurons_per_class = 6;
    c
}

const REPORTS: [&str; 10] = [
    "accuracy.csv",
    "modularity.csv",
    "entropy.csv",
    "correlations.csv",
    "unique_neurons_first.csv",
    "unique_neurons_last.csv",
    "community_sizes.csv",
    "table5.csv",
    "plotdata.json",
    "metadata.json",
];

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn smoke_run_with_two_snapshots_is_fast() {
    let mut c = small_config(5);
    c.snapshot_count = 2;
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let report = run_experiment(&c, dir.path()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(report.snapshot_count(), 2);
    for name in REPORTS {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    assert!(dir.path().join("snapshots/snapshot_02.ngmdl").exists());
    assert!(dir.path().join("graphs/snapshot_01_layer_2.edges.csv").exists());
    let modularity = String::from_utf8(read(dir.path(), "modularity.csv")).unwrap();
    assert!(modularity.starts_with("snapshot,layer,metric,value\n"));
    let entropy = String::from_utf8(read(dir.path(), "entropy.csv")).unwrap();
    assert!(entropy.starts_with("snapshot,scope,entropy\n1,model,"));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let c = small_config(11);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&c, a.path()).unwrap();
    run_experiment(&c, b.path()).unwrap();
    for name in REPORTS.iter().chain(&["snapshots/snapshot_04.ngmdl", "snapshots/manifest.json", "graphs/snapshot_03_layer_1.louvain.csv"]) {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn reanalysis_reproduces_the_run() {
    let c = small_config(3);
    let run = tempfile::tempdir().unwrap();
    let report = run_experiment(&c, run.path()).unwrap();
    let again = tempfile::tempdir().unwrap();
    let reanalyzed = analyze_snapshot_dir(&run.path().join("snapshots"), again.path()).unwrap();
    assert_eq!(report, reanalyzed);
    for name in REPORTS {
        assert_eq!(read(run.path(), name), read(again.path(), name), "{name}");
    }
}

#[test]
fn inspect_matches_report() {
    let c = small_config(8);
    let run = tempfile::tempdir().unwrap();
    let report = run_experiment(&c, run.path()).unwrap();
    let layer = inspect_graph(&run.path().join("snapshots"), 2, 3).unwrap();
    assert_eq!(layer, report.analyses[2].layers[1]);
    assert!(inspect_graph(&run.path().join("snapshots"), 3, 1).unwrap_err().is_config());
    assert!(inspect_graph(&run.path().join("snapshots"), 1, 5).unwrap_err().is_config());
}

#[test]
fn seeds_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small_config(1), a.path()).unwrap();
    run_experiment(&small_config(2), b.path()).unwrap();
    assert_ne!(read(a.path(), "snapshots/snapshot_04.ngmdl"), read(b.path(), "snapshots/snapshot_04.ngmdl"));
}

#[test]
fn table5_needs_two_layers() {
    let mut c = small_config(1);
    c.architecture.hidden_sizes = vec![8];
    let dir = tempfile::tempdir().unwrap();
    assert!(table5_runner(&c, dir.path()).unwrap_err().is_config());
    let t = table5_runner(&small_config(1), dir.path()).unwrap();
    assert_eq!(t.rows.len(), 8);
    assert!(t.get(LayerMetric::WeightedOverlap, 2).is_some());
}

#[test]
fn correlation_table_is_a_function_of_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small_config(4), dir.path()).unwrap();
    for row in report.table5().rows {
        let xs = report.layer_series(row.layer - 1, row.method);
        match xs.iter().copied().collect::<Option<Vec<f64>>>() {
            Some(xs) => assert_eq!(row.pcc, neurograph::pearson(&xs, &report.train_accuracy).ok()),
            None => assert_eq!(row.pcc, None),
        }
    }
}

#[test]
fn missing_idx_files_fail_at_dataset_stage() {
    let text = r#"{"schema":"neurograph.experiment/v1","seed":1,
        "dataset":{"source":"idx","train_images":"/nonexistent/a","train_labels":"/nonexistent/b","test_images":"/nonexistent/c","test_labels":"/nonexistent/d"},
        "architecture":{"hidden_sizes":[4]}}"#;
    let c = ExperimentConfig::from_json(text).unwrap();
    let err = run_experiment(&c, tempfile::tempdir().unwrap().path()).unwrap_err();
    assert!(!err.is_config());
    assert!(err.to_string().starts_with("dataset failed"), "{err}");
}
