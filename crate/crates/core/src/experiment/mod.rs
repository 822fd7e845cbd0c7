//! End-to-end pipeline: train with snapshots, analyze every snapshot, write
//! reports.
//!
//! Output layout under the run directory:
//!
//! ```text
//! snapshots/manifest.json        config + snapshot index
//! snapshots/snapshot_KK.ngmdl    checkpoints
//! dataset_manifest.json          source files and checksums (IDX only)
//! accuracy.csv modularity.csv entropy.csv correlations.csv ...
//! graphs/                        edge lists, membership, partitions
//! ```
//!
//! Snapshots and layers are numbered from 1 in every written file.

mod analysis;
mod config;
mod report;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::{analyze_snapshot, LayerAnalysis, SnapshotAnalysis};
pub use config::{ArchitectureSpec, DatasetSpec, ExperimentConfig, Metric, TrainingSpec, CONFIG_SCHEMA};
pub use report::{CorrelationRow, LayerMetric, MetricReport, Table3, Table3Row, Table5, Table5Row, Versus};

use crate::dataset::{load_idx, shuffle_labels, synth_blobs, Dataset, DatasetManifest, Split};
use crate::mlp::{evaluate, read_checkpoint, train_with_progress, write_checkpoint, Architecture, Model, TrainConfig};
use crate::seed::StageSeeds;

pub const SNAPSHOT_SCHEMA: &str = "neurograph.snapshots/v1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Invalid or unreadable configuration; the CLI maps this to exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Any failure while running the pipeline.
    #[error("{stage} failed{at}: {message}", at = snapshot_suffix(.snapshot))]
    Stage { stage: &'static str, snapshot: Option<usize>, message: String },
}

fn snapshot_suffix(snapshot: &Option<usize>) -> String {
    snapshot.map(|k| format!(" at snapshot {}", k + 1)).unwrap_or_default()
}

impl ExperimentError {
    pub(crate) fn stage(stage: &'static str, snapshot: Option<usize>, err: impl std::fmt::Display) -> Self {
        Self::Stage { stage, snapshot, message: err.to_string() }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config(_))
    }
}

pub(crate) fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::stage("io", None, format!("{}: {e}", path.display()))
}

/// Training and test split as used by the run, plus the checksum manifest
/// of their source files when they came from disk.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub manifest: Option<DatasetManifest>,
}

/// Loads or generates the datasets, applies the stratified subset and, for
/// mixed runs, the seeded label permutation.
pub fn prepare_datasets(config: &ExperimentConfig) -> Result<PreparedData, ExperimentError> {
    let seeds = StageSeeds::from_master(config.seed);
    let fail = |e: crate::dataset::DatasetError| ExperimentError::stage("dataset", None, e);
    let (mut train, mut test, manifest) = match &config.dataset {
        DatasetSpec::Idx { train_images, train_labels, test_images, test_labels, train_subset, test_subset } => {
            let manifest = DatasetManifest::build([
                ("train_images", train_images.as_path()),
                ("train_labels", train_labels.as_path()),
                ("test_images", test_images.as_path()),
                ("test_labels", test_labels.as_path()),
            ])
            .map_err(fail)?;
            let mut train = load_idx(train_images, train_labels).map_err(fail)?.with_split(Split::Train);
            let mut test = load_idx(test_images, test_labels).map_err(fail)?.with_split(Split::Test);
            if let Some(n) = train_subset.filter(|&n| n < train.len()) {
                train = train.stratified_subset(n);
            }
            if let Some(n) = test_subset.filter(|&n| n < test.len()) {
                test = test.stratified_subset(n);
            }
            (train, test, Some(manifest))
        }
        DatasetSpec::Synthetic { class_count, per_class, dim, spread } => {
            let (train, test) = synth_blobs(*class_count, *per_class, *dim, *spread, seeds.synthetic);
            (train, test, None)
        }
    };
    if train.dim() != test.dim() {
        return Err(ExperimentError::stage("dataset", None, format!("train dim {} != test dim {}", train.dim(), test.dim())));
    }
    if config.mixed {
        train = shuffle_labels(&train, seeds.label_shuffle_train);
        test = shuffle_labels(&test, seeds.label_shuffle_test);
    }
    Ok(PreparedData { train, test, manifest })
}

fn architecture(config: &ExperimentConfig, data: &PreparedData) -> Result<Architecture, ExperimentError> {
    let classes = data.train.class_count().max(data.test.class_count());
    Architecture::new(data.train.dim(), config.architecture.hidden_sizes.clone(), classes, config.architecture.dropout_rate)
        .map_err(|e| ExperimentError::Config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub iteration: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub schema: String,
    pub config: ExperimentConfig,
    pub epoch_losses: Vec<f64>,
    pub snapshots: Vec<SnapshotEntry>,
}

/// Snapshot models in order, with their iteration numbers.
#[derive(Debug, Clone)]
pub struct LoadedSnapshots {
    pub manifest: SnapshotManifest,
    pub models: Vec<Model>,
}

fn snapshot_file(k: usize) -> String {
    format!("snapshot_{:02}.ngmdl", k + 1)
}

/// Loads `manifest.json` and every checkpoint it lists.
pub fn load_snapshots(dir: &Path) -> Result<LoadedSnapshots, ExperimentError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
    let manifest: SnapshotManifest =
        serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
    if manifest.schema != SNAPSHOT_SCHEMA {
        return Err(ExperimentError::Config(format!("{}: unsupported schema {:?}", path.display(), manifest.schema)));
    }
    manifest.config.validate()?;
    let models = manifest
        .snapshots
        .iter()
        .enumerate()
        .map(|(k, entry)| {
            let p = dir.join(&entry.file);
            let file = fs::File::open(&p).map_err(|e| ExperimentError::stage("checkpoint", Some(k), format!("{}: {e}", p.display())))?;
            read_checkpoint(std::io::BufReader::new(file)).map_err(|e| ExperimentError::stage("checkpoint", Some(k), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LoadedSnapshots { manifest, models })
}

/// Runs the full pipeline and writes every output under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<MetricReport, ExperimentError> {
    config.validate()?;
    let data = prepare_datasets(config)?;
    let arch = architecture(config, &data)?;
    let seeds = StageSeeds::from_master(config.seed);
    let train_config = TrainConfig {
        epochs: config.training.epochs,
        batch_size: config.training.batch_size,
        learning_rate: config.training.learning_rate,
        snapshot_count: config.snapshot_count,
        init_seed: seeds.init,
        dropout_seed: seeds.dropout,
        order_seed: seeds.batch_order,
    };
    log::info!(
        "training {:?} on {} samples ({} test), {} snapshots",
        arch.hidden_sizes,
        data.train.len(),
        data.test.len(),
        config.snapshot_count
    );
    let series = train_with_progress(&arch, &data.train, &data.test, &train_config, |k, s| {
        log::info!("snapshot {}: step {} train {:.4} test {:.4}", k + 1, s.iteration, s.train_accuracy, s.test_accuracy)
    })
    .map_err(|e| ExperimentError::stage("training", None, e))?;

    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(io_err(&snap_dir))?;
    let mut entries = Vec::with_capacity(series.snapshots.len());
    for (k, s) in series.snapshots.iter().enumerate() {
        let p = snap_dir.join(snapshot_file(k));
        let file = fs::File::create(&p).map_err(io_err(&p))?;
        write_checkpoint(BufWriter::new(file), &s.model).map_err(|e| ExperimentError::stage("checkpoint", Some(k), e))?;
        entries.push(SnapshotEntry {
            file: snapshot_file(k),
            iteration: s.iteration,
            train_accuracy: s.train_accuracy,
            test_accuracy: s.test_accuracy,
        });
    }
    let manifest = SnapshotManifest {
        schema: SNAPSHOT_SCHEMA.to_string(),
        config: config.clone(),
        epoch_losses: series.epoch_losses.clone(),
        snapshots: entries,
    };
    write_text(&snap_dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    let models: Vec<Model> = series.snapshots.into_iter().map(|s| s.model).collect();
    analyze_models(config, &data, &manifest, &models, out)
}

/// Re-runs the analysis from a snapshot directory written by
/// [`run_experiment`]. The datasets are rebuilt from the stored config and,
/// for IDX sources, checked against the recorded checksums.
pub fn analyze_snapshot_dir(snapshots: &Path, out: &Path) -> Result<MetricReport, ExperimentError> {
    let loaded = load_snapshots(snapshots)?;
    let config = &loaded.manifest.config;
    let data = prepare_datasets(config)?;
    verify_recorded_manifest(snapshots, &data)?;
    analyze_models(config, &data, &loaded.manifest, &loaded.models, out)
}

fn verify_recorded_manifest(snapshots: &Path, data: &PreparedData) -> Result<(), ExperimentError> {
    let Some(current) = &data.manifest else { return Ok(()) };
    let recorded = snapshots.parent().map(|p| p.join("dataset_manifest.json")).filter(|p| p.exists());
    let Some(path) = recorded else { return Ok(()) };
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let recorded = DatasetManifest::from_json(&path, &text).map_err(|e| ExperimentError::stage("dataset", None, e))?;
    if recorded.files.iter().map(|f| &f.sha256).ne(current.files.iter().map(|f| &f.sha256)) {
        return Err(ExperimentError::stage("dataset", None, format!("dataset files no longer match {}", path.display())));
    }
    Ok(())
}

fn analyze_models(
    config: &ExperimentConfig,
    data: &PreparedData,
    manifest: &SnapshotManifest,
    models: &[Model],
    out: &Path,
) -> Result<MetricReport, ExperimentError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let graph_dir = config.export_graphs.then(|| out.join("graphs"));
    let act_dir = config.persist_activations.then(|| out.join("activations"));
    for d in graph_dir.iter().chain(&act_dir) {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    let accuracies = models
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let acc = |d: &Dataset| evaluate(m, d).map_err(|e| ExperimentError::stage("evaluation", Some(k), e));
            Ok((acc(&data.train)?, acc(&data.test)?))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let job = |k: usize| {
        log::debug!("analyzing snapshot {}", k + 1);
        analysis::analyze_snapshot(config, &models[k], &data.train, k, graph_dir.as_deref(), act_dir.as_deref())
    };
    #[cfg(feature = "parallel")]
    let analyses = {
        use rayon::prelude::*;
        (0..models.len()).into_par_iter().map(job).collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let analyses = (0..models.len()).map(job).collect::<Result<Vec<_>, _>>()?;

    let report = MetricReport {
        layer_count: config.architecture.hidden_sizes.len(),
        class_count: data.train.class_count(),
        iterations: manifest.snapshots.iter().map(|s| s.iteration).collect(),
        train_accuracy: accuracies.iter().map(|a| a.0).collect(),
        test_accuracy: accuracies.iter().map(|a| a.1).collect(),
        analyses,
    };
    report.write_all(config, out)?;
    if let Some(m) = &data.manifest {
        write_text(&out.join("dataset_manifest.json"), &m.to_json())?;
    }
    Ok(report)
}

/// Analysis of a single (snapshot, layer) pair from a snapshot directory;
/// both indices are 1-based.
pub fn inspect_graph(snapshots: &Path, layer: usize, snapshot: usize) -> Result<LayerAnalysis, ExperimentError> {
    let loaded = load_snapshots(snapshots)?;
    let config = &loaded.manifest.config;
    let layers = config.architecture.hidden_sizes.len();
    if layer == 0 || layer > layers {
        return Err(ExperimentError::Config(format!("layer {layer} out of range 1..={layers}")));
    }
    if snapshot == 0 || snapshot > loaded.models.len() {
        return Err(ExperimentError::Config(format!("snapshot {snapshot} out of range 1..={}", loaded.models.len())));
    }
    let data = prepare_datasets(config)?;
    let mut a = analysis::analyze_snapshot(config, &loaded.models[snapshot - 1], &data.train, snapshot - 1, None, None)?;
    Ok(a.layers.swap_remove(layer - 1))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Table of per-method correlations with training accuracy; needs at least
/// two hidden layers.
pub fn table5_runner(config: &ExperimentConfig, out: &Path) -> Result<Table5, ExperimentError> {
    if config.architecture.hidden_sizes.len() < 2 {
        return Err(ExperimentError::Config("the method comparison needs at least two hidden layers".into()));
    }
    Ok(run_experiment(config, out)?.table5())
}

/// Largest community sizes at the first and last snapshot and the
/// correlation of mean community size with training accuracy.
pub fn table3_runner(config: &ExperimentConfig, out: &Path) -> Result<Table3, ExperimentError> {
    Ok(run_experiment(config, out)?.table3())
}

/// Default output directory for a config: its `output_dir` or `./run`.
pub fn default_output(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("run"))
}
