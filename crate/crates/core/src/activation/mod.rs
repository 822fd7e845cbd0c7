//! The activation matrix: one row per sample, one column per hidden neuron
//! (layers concatenated, output layer excluded), plus the derived
//! column-normalized matrix and per-class mean activations.

mod io;

pub use io::{read_activations, write_activations, ACTIVATION_MAGIC};

use thiserror::Error;

use crate::dataset::{stratified_rows, Dataset};
use crate::mlp::{batch_matrix, MlpError, Mode, Model};

#[derive(Debug, Error)]
pub enum ActivationError {
    #[error("sample cap {cap} is smaller than the class count {classes}")]
    CapTooSmall { cap: usize, classes: usize },
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("layer {layer} out of range ({layers} hidden layers)")]
    NoSuchLayer { layer: usize, layers: usize },
    #[error("invalid activation matrix: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] MlpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Post-ReLU activations stored as `f32`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix {
    values: Vec<f32>,
    rows: usize,
    cols: usize,
    /// `layer_offsets[l]..layer_offsets[l + 1]` are the columns of layer `l`.
    layer_offsets: Vec<usize>,
    labels: Vec<u32>,
    class_count: usize,
}

impl ActivationMatrix {
    pub fn new(values: Vec<f32>, layer_offsets: Vec<usize>, labels: Vec<u32>, class_count: usize) -> Result<Self, ActivationError> {
        let invalid = |m: String| Err(ActivationError::Invalid(m));
        if layer_offsets.len() < 2 || layer_offsets[0] != 0 || layer_offsets.windows(2).any(|w| w[1] <= w[0]) {
            return invalid(format!("layer offsets {layer_offsets:?} do not partition the columns"));
        }
        let cols = *layer_offsets.last().unwrap();
        let rows = labels.len();
        if values.len() != rows * cols {
            return invalid(format!("{} values for a {rows}x{cols} matrix", values.len()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return invalid("activations must be non-negative".into());
        }
        if labels.iter().any(|&l| l as usize >= class_count) {
            return invalid(format!("label outside [0, {class_count})"));
        }
        Ok(Self { values, rows, cols, layer_offsets, labels, class_count })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn layer_offsets(&self) -> &[usize] {
        &self.layer_offsets
    }

    pub fn layer_count(&self) -> usize {
        self.layer_offsets.len() - 1
    }

    pub fn layer_columns(&self, layer: usize) -> Result<std::ops::Range<usize>, ActivationError> {
        if layer >= self.layer_count() {
            return Err(ActivationError::NoSuchLayer { layer, layers: self.layer_count() });
        }
        Ok(self.layer_offsets[layer]..self.layer_offsets[layer + 1])
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.values[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f32> + '_ {
        self.values[c..].iter().step_by(self.cols).copied()
    }

    /// Rows belonging to `class`, in matrix order.
    pub fn class_rows(&self, class: usize) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.labels[r] as usize == class).collect()
    }

    /// Sub-matrix of the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self {
            values,
            rows: rows.len(),
            cols: self.cols,
            layer_offsets: self.layer_offsets.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            class_count: self.class_count,
        }
    }
}

const CAPTURE_CHUNK: usize = 256;

/// Runs the model in eval mode over (a stratified cap of) `dataset` and
/// records every hidden activation. Row order follows the dataset.
pub fn record_activations(model: &Model, dataset: &Dataset, sample_cap: usize) -> Result<ActivationMatrix, ActivationError> {
    if sample_cap < dataset.class_count() {
        return Err(ActivationError::CapTooSmall { cap: sample_cap, classes: dataset.class_count() });
    }
    let rows = stratified_rows(dataset.labels(), dataset.class_count(), sample_cap);
    let arch = model.architecture();
    let mut layer_offsets = vec![0];
    for &w in &arch.hidden_sizes {
        layer_offsets.push(layer_offsets.last().unwrap() + w);
    }
    let cols = arch.hidden_neurons();
    let mut values = vec![0f32; rows.len() * cols];
    for (chunk_idx, chunk) in rows.chunks(CAPTURE_CHUNK).enumerate() {
        let pass = model.forward(batch_matrix(dataset, chunk).view(), true, Mode::Eval)?;
        for (layer, acts) in pass.hidden.iter().enumerate() {
            let off = layer_offsets[layer];
            for (i, row) in acts.rows().into_iter().enumerate() {
                let base = (chunk_idx * CAPTURE_CHUNK + i) * cols + off;
                for (dst, &v) in values[base..base + row.len()].iter_mut().zip(row.iter()) {
                    *dst = v as f32;
                }
            }
        }
    }
    let labels = rows.iter().map(|&r| dataset.labels()[r]).collect();
    ActivationMatrix::new(values, layer_offsets, labels, dataset.class_count())
}

/// Column-normalized activations in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedActivations {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    dead: Vec<bool>,
}

impl NormalizedActivations {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values[c..].iter().step_by(self.cols).copied().collect()
    }

    /// True for columns whose activations were all zero.
    pub fn is_dead(&self, c: usize) -> bool {
        self.dead[c]
    }

    pub fn dead_columns(&self) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.dead[c]).collect()
    }
}

/// Divides every column by its sum (accumulated in `f64`). All-zero columns
/// stay zero and are flagged dead.
pub fn normalize_columns(f: &ActivationMatrix) -> NormalizedActivations {
    let mut sums = vec![0f64; f.cols];
    for r in 0..f.rows {
        for (s, &v) in sums.iter_mut().zip(f.row(r)) {
            *s += f64::from(v);
        }
    }
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let s = sums[i % f.cols];
            if s > 0.0 { f64::from(v) / s } else { 0.0 }
        })
        .collect();
    NormalizedActivations { values, rows: f.rows, cols: f.cols, dead: sums.iter().map(|&s| s == 0.0).collect() }
}

/// Mean activation of every neuron in `layer` over the rows of `class`.
pub fn class_mean_activation(f: &ActivationMatrix, class: usize, layer: usize) -> Result<Vec<f64>, ActivationError> {
    let cols = f.layer_columns(layer)?;
    let rows = f.class_rows(class);
    if rows.is_empty() {
        return Err(ActivationError::EmptyClass(class));
    }
    let mut sums = vec![0f64; cols.len()];
    for &r in &rows {
        for (s, &v) in sums.iter_mut().zip(&f.row(r)[cols.clone()]) {
            *s += f64::from(v);
        }
    }
    let n = rows.len() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Per-class, per-layer mean activations. `None` for classes without rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMeanActivations {
    /// `means[class][layer][neuron]`.
    means: Vec<Option<Vec<Vec<f64>>>>,
    class_sizes: Vec<usize>,
}

impl ClassMeanActivations {
    pub fn compute(f: &ActivationMatrix) -> Self {
        let means = (0..f.class_count)
            .map(|class| {
                (0..f.layer_count())
                    .map(|layer| class_mean_activation(f, class, layer).ok())
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        let mut class_sizes = vec![0; f.class_count];
        for &l in &f.labels {
            class_sizes[l as usize] += 1;
        }
        Self { means, class_sizes }
    }

    /// Builds the table directly from `means[class][layer][neuron]`.
    pub fn from_means(means: Vec<Option<Vec<Vec<f64>>>>, class_sizes: Vec<usize>) -> Self {
        Self { means, class_sizes }
    }

    pub fn class_count(&self) -> usize {
        self.means.len()
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.class_sizes[class]
    }

    /// `V_class(·, layer)`, or `None` if the class has no samples.
    pub fn get(&self, class: usize, layer: usize) -> Option<&[f64]> {
        self.means.get(class)?.as_ref().map(|m| m[layer].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use crate::mlp::{Architecture, DenseLayer};
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn matrix(rows: &[&[f32]], offsets: Vec<usize>, labels: Vec<u32>, classes: usize) -> ActivationMatrix {
        ActivationMatrix::new(rows.concat(), offsets, labels, classes).unwrap()
    }

    #[test]
    fn records_relu_of_affine_map() {
        let arch = Architecture::new(2, vec![2], 2, 0.5).unwrap();
        let layers = vec![
            DenseLayer { weights: array![[1.0, -2.0], [0.5, 1.0]], bias: array![0.25, -1.0] },
            DenseLayer { weights: Array2::zeros((2, 2)), bias: array![0.0, 0.0] },
        ];
        let model = Model::from_layers(arch, layers, 0).unwrap();
        let ds = Dataset::new(vec![1.0, 0.0, 0.0, 1.0], 2, vec![0, 1], 2, Split::Train).unwrap();
        let f = record_activations(&model, &ds, 2).unwrap();
        assert_eq!(f.values(), &[1.25, 0.0, 0.0, 0.0]);
        assert_eq!(f.labels(), &[0, 1]);
        assert!(matches!(record_activations(&model, &ds, 1), Err(ActivationError::CapTooSmall { .. })));
    }

    #[test]
    fn stratified_capture_counts() {
        let arch = Architecture::new(3, vec![4, 2], 10, 0.0).unwrap();
        let model = Model::init(arch, 1).unwrap();
        let labels: Vec<u32> = (0..500).map(|i| (i % 10) as u32).collect();
        let feats = (0..1500).map(|i| (i % 13) as f32 / 13.0).collect();
        let ds = Dataset::new(feats, 3, labels, 10, Split::Train).unwrap();
        let f = record_activations(&model, &ds, 100).unwrap();
        assert_eq!(f.rows(), 100);
        assert_eq!(f.cols(), 6);
        assert_eq!(f.layer_offsets(), &[0, 4, 6]);
        for c in 0..10 {
            assert_eq!(f.class_rows(c).len(), 10);
        }
        assert_eq!(record_activations(&model, &ds, 500).unwrap().rows(), 500);
    }

    #[test]
    fn normalization_fixtures() {
        let f = matrix(&[&[1.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]], vec![0, 2], vec![0, 0, 0], 1);
        let n = normalize_columns(&f);
        assert_eq!(n.column(0), vec![0.25, 0.25, 0.5]);
        assert_eq!(n.column(1), vec![0.0, 0.0, 0.0]);
        assert!(n.is_dead(1) && !n.is_dead(0));
        assert_eq!(n.dead_columns(), vec![1]);
    }

    #[test]
    fn class_mean_fixtures() {
        let f = matrix(&[&[1.0], &[5.0], &[0.0], &[2.0]], vec![0, 1], vec![0, 1, 0, 0], 3);
        assert_eq!(class_mean_activation(&f, 0, 0).unwrap(), vec![1.0]);
        assert_eq!(class_mean_activation(&f, 1, 0).unwrap(), vec![5.0]);
        assert!(matches!(class_mean_activation(&f, 2, 0), Err(ActivationError::EmptyClass(2))));
        assert!(matches!(class_mean_activation(&f, 0, 1), Err(ActivationError::NoSuchLayer { .. })));
        let v = ClassMeanActivations::compute(&f);
        assert_eq!(v.get(0, 0), Some(&[1.0][..]));
        assert_eq!(v.get(2, 0), None);
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(ActivationMatrix::new(vec![-1.0], vec![0, 1], vec![0], 1).is_err());
        assert!(ActivationMatrix::new(vec![1.0], vec![0, 2], vec![0], 1).is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = ActivationMatrix> {
        (1usize..12, 1usize..4, 1usize..4, 1usize..5).prop_flat_map(|(rows, w1, w2, classes)| {
            (
                proptest::collection::vec(prop_oneof![Just(0.0f32), 0.0f32..10.0], rows * (w1 + w2)),
                proptest::collection::vec(0..classes as u32, rows),
            )
                .prop_map(move |(values, labels)| ActivationMatrix::new(values, vec![0, w1, w1 + w2], labels, classes).unwrap())
        })
    }

    proptest! {
        #[test]
        fn live_columns_sum_to_one(f in arb_matrix()) {
            let n = normalize_columns(&f);
            for c in 0..n.cols() {
                let s: f64 = n.column(c).iter().sum();
                if n.is_dead(c) {
                    prop_assert_eq!(s, 0.0);
                } else {
                    prop_assert!((s - 1.0).abs() < 1e-9);
                }
                prop_assert!(n.column(c).iter().all(|&v| v >= 0.0));
            }
        }

        #[test]
        fn class_means_match_brute_force(f in arb_matrix()) {
            for layer in 0..f.layer_count() {
                let cols = f.layer_columns(layer).unwrap();
                for class in 0..f.class_count() {
                    let mut count = 0usize;
                    let mut sums = vec![0f64; cols.len()];
                    for r in 0..f.rows() {
                        if f.labels()[r] as usize == class {
                            count += 1;
                            for (k, c) in cols.clone().enumerate() {
                                sums[k] += f64::from(f.get(r, c));
                            }
                        }
                    }
                    match class_mean_activation(&f, class, layer) {
                        Ok(v) => for (a, s) in v.iter().zip(&sums) {
                            prop_assert!((a - s / count as f64).abs() <= 1e-12);
                        },
                        Err(_) => prop_assert_eq!(count, 0),
                    }
                }
            }
        }

        #[test]
        fn weighted_class_means_equal_global_mean(f in arb_matrix()) {
            let v = ClassMeanActivations::compute(&f);
            for layer in 0..f.layer_count() {
                let cols = f.layer_columns(layer).unwrap();
                for (k, c) in cols.enumerate() {
                    let global = f.column(c).map(f64::from).sum::<f64>() / f.rows() as f64;
                    let weighted: f64 = (0..f.class_count())
                        .filter_map(|i| v.get(i, layer).map(|m| m[k] * v.class_size(i) as f64))
                        .sum::<f64>() / f.rows() as f64;
                    prop_assert!((global - weighted).abs() < 1e-9);
                }
            }
        }
    }
}
