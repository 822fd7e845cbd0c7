use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Architecture, MlpError, Model};
use crate::dataset::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub snapshot_count: usize,
    pub init_seed: u64,
    pub dropout_seed: u64,
    pub order_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 20, batch_size: 64, learning_rate: 0.01, snapshot_count: 20, init_seed: 0, dropout_seed: 1, order_seed: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Parameters as stored in a checkpoint (rounded to `f32`).
    pub model: Model,
    /// Number of SGD steps taken when the snapshot was recorded.
    pub iteration: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    pub snapshots: Vec<Snapshot>,
    /// Mean training loss of every epoch.
    pub epoch_losses: Vec<f64>,
}

impl SnapshotSeries {
    pub fn train_accuracies(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.train_accuracy).collect()
    }

    pub fn test_accuracies(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.test_accuracy).collect()
    }
}

/// Copies the given dataset rows into an `f64` batch matrix.
pub fn batch_matrix(dataset: &Dataset, rows: &[usize]) -> Array2<f64> {
    let dim = dataset.dim();
    let mut out = Array2::zeros((rows.len(), dim));
    for (mut dst, &r) in out.rows_mut().into_iter().zip(rows) {
        for (d, &s) in dst.iter_mut().zip(dataset.sample(r)) {
            *d = f64::from(s);
        }
    }
    out
}

const EVAL_CHUNK: usize = 512;

fn correct_in(model: &Model, dataset: &Dataset, start: usize) -> Result<usize, MlpError> {
    let end = (start + EVAL_CHUNK).min(dataset.len());
    let rows: Vec<usize> = (start..end).collect();
    let logits = model.logits(batch_matrix(dataset, &rows).view())?;
    Ok(logits
        .rows()
        .into_iter()
        .zip(&dataset.labels()[start..end])
        .filter(|(row, &y)| argmax(row.view()) == y as usize)
        .count())
}

fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of samples whose argmax prediction (lowest index on ties) equals
/// the label, with dropout disabled.
pub fn evaluate(model: &Model, dataset: &Dataset) -> Result<f64, MlpError> {
    if dataset.is_empty() {
        return Err(MlpError::EmptyDataset);
    }
    let starts: Vec<usize> = (0..dataset.len()).step_by(EVAL_CHUNK).collect();
    #[cfg(feature = "parallel")]
    let counts: Vec<Result<usize, MlpError>> = {
        use rayon::prelude::*;
        starts.par_iter().map(|&s| correct_in(model, dataset, s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<Result<usize, MlpError>> = starts.iter().map(|&s| correct_in(model, dataset, s)).collect();
    let mut correct = 0;
    for c in counts {
        correct += c?;
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Trains with mini-batch SGD and records `snapshot_count` snapshots at
/// uniform step intervals: snapshot `k` (1-based) is taken after
/// `k * total_steps / snapshot_count` steps, so the last one is the final
/// model. Accuracies are measured in eval mode on the rounded parameters.
pub fn train_with_snapshots(arch: &Architecture, train: &Dataset, test: &Dataset, config: &TrainConfig) -> Result<SnapshotSeries, MlpError> {
    train_with_progress(arch, train, test, config, |_, _| {})
}

/// As [`train_with_snapshots`], calling `on_snapshot(index, snapshot)` as
/// each snapshot is recorded.
pub fn train_with_progress(
    arch: &Architecture,
    train: &Dataset,
    test: &Dataset,
    config: &TrainConfig,
    mut on_snapshot: impl FnMut(usize, &Snapshot),
) -> Result<SnapshotSeries, MlpError> {
    if train.is_empty() || test.is_empty() {
        return Err(MlpError::EmptyDataset);
    }
    if config.snapshot_count < 2 {
        return Err(MlpError::InvalidConfig("snapshot_count must be at least 2".into()));
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(MlpError::InvalidConfig("epochs and batch_size must be positive".into()));
    }
    if train.dim() != arch.input_dim || test.dim() != arch.input_dim {
        return Err(MlpError::Shape { expected: format!("{} input features", arch.input_dim), found: train.dim().to_string() });
    }
    let steps_per_epoch = train.len().div_ceil(config.batch_size);
    let total_steps = steps_per_epoch * config.epochs;
    if total_steps < config.snapshot_count {
        return Err(MlpError::InvalidConfig(format!(
            "{total_steps} training steps cannot hold {} distinct snapshots",
            config.snapshot_count
        )));
    }
    let boundaries: Vec<usize> = (1..=config.snapshot_count).map(|k| k * total_steps / config.snapshot_count).collect();

    let mut model = Model::init(arch.clone(), config.init_seed)?;
    let mut order_rng = crate::seed::rng(config.order_seed);
    let mut dropout_rng = crate::seed::rng(config.dropout_seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut snapshots = Vec::with_capacity(config.snapshot_count);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut step = 0;
    for _ in 0..config.epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        for rows in order.chunks(config.batch_size) {
            let x = batch_matrix(train, rows);
            let labels: Vec<u32> = rows.iter().map(|&r| train.labels()[r]).collect();
            loss_sum += model.train_step(x.view(), &labels, config.learning_rate, &mut dropout_rng)?;
            step += 1;
            if boundaries.get(snapshots.len()) == Some(&step) {
                let frozen = model.rounded_to_f32();
                let snapshot = Snapshot {
                    train_accuracy: evaluate(&frozen, train)?,
                    test_accuracy: evaluate(&frozen, test)?,
                    model: frozen,
                    iteration: step,
                };
                on_snapshot(snapshots.len(), &snapshot);
                snapshots.push(snapshot);
            }
        }
        epoch_losses.push(loss_sum / steps_per_epoch as f64);
    }
    Ok(SnapshotSeries { snapshots, epoch_losses })
}

/// Mean cross-entropy of `model` over a whole dataset (eval mode).
pub fn dataset_loss(model: &Model, dataset: &Dataset) -> Result<f64, MlpError> {
    let rows: Vec<usize> = (0..dataset.len()).collect();
    let x = batch_matrix(dataset, &rows);
    model.loss(ArrayView2::from(&x), dataset.labels())
}
