//! Labelled classification data: IDX loading, label-shuffled controls and
//! seeded synthetic blobs.

mod idx;
mod manifest;
mod synth;

pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IdxImages};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use synth::synth_blobs;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad magic at byte offset 0: expected {expected}, found {found}")]
    BadMagic { path: String, expected: u32, found: u32 },
    #[error("{path}: truncated at byte offset {offset}: needed {needed} more bytes")]
    Truncated { path: String, offset: usize, needed: usize },
    #[error("{path}: unsupported IDX element type 0x{code:02x} at byte offset 2")]
    UnsupportedType { path: String, code: u8 },
    #[error("image count {images} does not match label count {labels} (label header at byte offset 4)")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: {reason}")]
    Manifest { path: String, reason: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Row-major feature matrix plus one class id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    dim: usize,
    labels: Vec<u32>,
    class_count: usize,
    split: Split,
}

impl Dataset {
    pub fn new(
        features: Vec<f32>,
        dim: usize,
        labels: Vec<u32>,
        class_count: usize,
        split: Split,
    ) -> Result<Self, DatasetError> {
        if dim == 0 {
            return Err(DatasetError::Invalid("feature dimension must be positive".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(DatasetError::Invalid(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= class_count) {
            return Err(DatasetError::Invalid(format!("label {bad} outside [0, {class_count})")));
        }
        Ok(Self { features, dim, labels, class_count, split })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn sample(&self, row: usize) -> &[f32] {
        &self.features[row * self.dim..(row + 1) * self.dim]
    }

    /// Per-class sample counts, indexed by class id.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.sample(r));
            labels.push(self.labels[r]);
        }
        Self { features, dim: self.dim, labels, class_count: self.class_count, split: self.split }
    }

    /// Stratified subset of at most `cap` rows, kept in dataset order.
    pub fn stratified_subset(&self, cap: usize) -> Self {
        self.select(&stratified_rows(&self.labels, self.class_count, cap))
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }
}

/// Row indices of a stratified cap over `labels`, in ascending order.
///
/// Each class receives `floor(cap * n_c / n)` rows; leftover slots go to the
/// classes with the largest fractional remainders (lower class id on ties).
/// Within a class the earliest rows are taken.
pub fn stratified_rows(labels: &[u32], class_count: usize, cap: usize) -> Vec<usize> {
    let n = labels.len();
    if cap >= n {
        return (0..n).collect();
    }
    let mut counts = vec![0usize; class_count];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let mut quota: Vec<usize> = counts.iter().map(|&c| cap * c / n).collect();
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..class_count).collect();
    // remainder of cap * c / n, compared exactly in integers
    order.sort_by(|&a, &b| ((cap * counts[b]) % n).cmp(&((cap * counts[a]) % n)).then(a.cmp(&b)));
    for &c in order.iter().take(cap - assigned) {
        quota[c] += 1;
    }
    let mut rows = Vec::with_capacity(cap);
    for (row, &l) in labels.iter().enumerate() {
        let q = &mut quota[l as usize];
        if *q > 0 {
            *q -= 1;
            rows.push(row);
        }
    }
    rows
}

/// Uniformly permutes the labels; features are untouched.
pub fn shuffle_labels(dataset: &Dataset, seed: u64) -> Dataset {
    let mut out = dataset.clone();
    out.labels.shuffle(&mut crate::seed::rng(seed));
    out
}
