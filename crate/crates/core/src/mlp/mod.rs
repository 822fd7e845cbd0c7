//! Dense ReLU classifier with dropout and a softmax head, trained by plain
//! mini-batch SGD on mean cross-entropy.
//!
//! Weights are stored `(fan_out, fan_in)` and a batch is a `(rows, features)`
//! matrix, so one layer computes `Y = X · Wᵀ + b`.

mod checkpoint;
mod train;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use train::{batch_matrix, dataset_loss, evaluate, train_with_progress, train_with_snapshots, Snapshot, SnapshotSeries, TrainConfig};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },
    #[error("label {label} outside [0, {classes})")]
    LabelOutOfRange { label: u32, classes: usize },
    #[error("training diverged: batch loss {0}")]
    Diverged(f64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_classes: usize,
    /// Applied after every hidden layer in training mode only.
    pub dropout_rate: f64,
}

impl Architecture {
    pub fn new(input_dim: usize, hidden_sizes: Vec<usize>, output_classes: usize, dropout_rate: f64) -> Result<Self, MlpError> {
        let arch = Self { input_dim, hidden_sizes, output_classes, dropout_rate };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        let bad = |m: &str| Err(MlpError::InvalidArchitecture(m.to_string()));
        if self.input_dim == 0 {
            return bad("input dimension must be positive");
        }
        if self.hidden_sizes.is_empty() {
            return bad("at least one hidden layer is required");
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layers must have positive width");
        }
        if self.output_classes < 2 {
            return bad("at least two output classes are required");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout rate must lie in [0, 1)");
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for every dense layer including the output layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden_sizes.len() + 2);
        widths.push(self.input_dim);
        widths.extend_from_slice(&self.hidden_sizes);
        widths.push(self.output_classes);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Total number of non-output neurons.
    pub fn hidden_neurons(&self) -> usize {
        self.hidden_sizes.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `(fan_out, fan_in)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    arch: Architecture,
    layers: Vec<DenseLayer>,
    seed: u64,
}

/// Forward-pass regime. Dropout is only drawn in `Train`.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut ChaCha8Rng),
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Post-ReLU activations of every hidden layer (before dropout), present
    /// only when capture was requested.
    pub hidden: Vec<Array2<f64>>,
    pub probabilities: Array2<f64>,
}

/// Parameter gradients, laid out like the model's layers.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

struct Cache {
    /// Input to each dense layer (post-dropout for hidden inputs).
    inputs: Vec<Array2<f64>>,
    /// ReLU derivative times dropout scale, per hidden layer.
    masks: Vec<Array2<f64>>,
    logits: Array2<f64>,
}

impl Model {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self, MlpError> {
        arch.validate()?;
        let mut rng = crate::seed::rng(seed);
        let layers = arch
            .layer_dims()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-limit..limit));
                DenseLayer { weights, bias: Array1::zeros(fan_out) }
            })
            .collect();
        Ok(Self { arch, layers, seed })
    }

    /// Assembles a model from explicit parameters, checking every shape.
    pub fn from_layers(arch: Architecture, layers: Vec<DenseLayer>, seed: u64) -> Result<Self, MlpError> {
        arch.validate()?;
        let dims = arch.layer_dims();
        if dims.len() != layers.len() {
            return Err(MlpError::Shape { expected: format!("{} layers", dims.len()), found: format!("{} layers", layers.len()) });
        }
        for (&(fan_in, fan_out), layer) in dims.iter().zip(&layers) {
            if layer.weights.dim() != (fan_out, fan_in) || layer.bias.len() != fan_out {
                return Err(MlpError::Shape {
                    expected: format!("{fan_out}x{fan_in} weights, {fan_out} biases"),
                    found: format!("{:?} weights, {} biases", layer.weights.dim(), layer.bias.len()),
                });
            }
        }
        Ok(Self { arch, layers, seed })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Copy with every parameter rounded to the nearest `f32`, i.e. exactly
    /// what a checkpoint stores.
    pub fn rounded_to_f32(&self) -> Self {
        let round = |x: &f64| f64::from(*x as f32);
        let layers = self
            .layers
            .iter()
            .map(|l| DenseLayer { weights: l.weights.map(round), bias: l.bias.map(round) })
            .collect();
        let mut arch = self.arch.clone();
        arch.dropout_rate = round(&arch.dropout_rate);
        Self { arch, layers, seed: self.seed }
    }

    fn check_inputs(&self, inputs: &ArrayView2<f64>) -> Result<(), MlpError> {
        if inputs.ncols() != self.arch.input_dim {
            return Err(MlpError::Shape {
                expected: format!("{} input features", self.arch.input_dim),
                found: format!("{}", inputs.ncols()),
            });
        }
        Ok(())
    }

    fn run(&self, inputs: ArrayView2<f64>, mut mode: Mode<'_>, capture: bool) -> Result<(Cache, Vec<Array2<f64>>), MlpError> {
        self.check_inputs(&inputs)?;
        let hidden_count = self.layers.len() - 1;
        let keep = 1.0 - self.arch.dropout_rate;
        let mut cache = Cache { inputs: Vec::with_capacity(self.layers.len()), masks: Vec::with_capacity(hidden_count), logits: Array2::zeros((0, 0)) };
        let mut captured = Vec::new();
        let mut current = inputs.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights.t());
            z += &layer.bias;
            cache.inputs.push(current);
            if i == hidden_count {
                cache.logits = z;
                break;
            }
            let mut mask = z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            z.mapv_inplace(|v| v.max(0.0));
            if capture {
                captured.push(z.clone());
            }
            if let Mode::Train(rng) = &mut mode {
                if self.arch.dropout_rate > 0.0 {
                    for m in mask.iter_mut() {
                        let scale = if rng.random::<f64>() < self.arch.dropout_rate { 0.0 } else { 1.0 / keep };
                        *m *= scale;
                    }
                    // mask is zero wherever the ReLU output is zero
                    z *= &mask;
                }
            }
            cache.masks.push(mask);
            current = z;
        }
        Ok((cache, captured))
    }

    /// Forward pass over a batch. Hidden activations are `max(0, y)`; the
    /// output layer is a softmax over logits.
    pub fn forward(&self, inputs: ArrayView2<f64>, capture: bool, mode: Mode<'_>) -> Result<ForwardPass, MlpError> {
        let (cache, hidden) = self.run(inputs, mode, capture)?;
        Ok(ForwardPass { hidden, probabilities: softmax(&cache.logits) })
    }

    /// Logits in eval mode.
    pub fn logits(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>, MlpError> {
        Ok(self.run(inputs, Mode::Eval, false)?.0.logits)
    }

    /// Mean cross-entropy in eval mode.
    pub fn loss(&self, inputs: ArrayView2<f64>, labels: &[u32]) -> Result<f64, MlpError> {
        let logits = self.logits(inputs)?;
        self.check_labels(labels, logits.nrows())?;
        Ok(cross_entropy(&logits, labels))
    }

    fn check_labels(&self, labels: &[u32], rows: usize) -> Result<(), MlpError> {
        if labels.len() != rows {
            return Err(MlpError::Shape { expected: format!("{rows} labels"), found: labels.len().to_string() });
        }
        if let Some(&label) = labels.iter().find(|&&l| l as usize >= self.arch.output_classes) {
            return Err(MlpError::LabelOutOfRange { label, classes: self.arch.output_classes });
        }
        Ok(())
    }

    /// Mean cross-entropy and its gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, inputs: ArrayView2<f64>, labels: &[u32], mode: Mode<'_>) -> Result<(f64, Gradients), MlpError> {
        let (cache, _) = self.run(inputs, mode, false)?;
        self.check_labels(labels, cache.logits.nrows())?;
        let loss = cross_entropy(&cache.logits, labels);
        let batch = labels.len() as f64;
        let mut delta = softmax(&cache.logits);
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y as usize] -= 1.0;
        }
        delta /= batch;
        let mut grads = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let weights = delta.t().dot(&cache.inputs[i]);
            let bias = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut upstream = delta.dot(&self.layers[i].weights);
                upstream *= &cache.masks[i - 1];
                delta = upstream;
            }
            grads.push(DenseLayer { weights, bias });
        }
        grads.reverse();
        Ok((loss, Gradients { layers: grads }))
    }

    /// One SGD step on mean cross-entropy. Returns the pre-update batch loss;
    /// parameters are left untouched if that loss is not finite.
    pub fn train_step(&mut self, inputs: ArrayView2<f64>, labels: &[u32], learning_rate: f64, dropout_rng: &mut ChaCha8Rng) -> Result<f64, MlpError> {
        let (loss, grads) = self.loss_and_gradients(inputs, labels, Mode::Train(dropout_rng))?;
        if !loss.is_finite() {
            return Err(MlpError::Diverged(loss));
        }
        if learning_rate != 0.0 {
            for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
                layer.weights.scaled_add(-learning_rate, &g.weights);
                layer.bias.scaled_add(-learning_rate, &g.bias);
            }
        }
        Ok(loss)
    }
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

fn cross_entropy(logits: &Array2<f64>, labels: &[u32]) -> f64 {
    let total: f64 = logits
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - row[y as usize]
        })
        .sum();
    total / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn tiny_arch(hidden: usize, dropout: f64) -> Architecture {
        Architecture::new(2, vec![hidden], 2, dropout).unwrap()
    }

    #[test]
    fn init_shapes() {
        let m = Model::init(tiny_arch(3, 0.0), 7).unwrap();
        assert_eq!(m.layers()[0].weights.dim(), (3, 2));
        assert_eq!(m.layers()[1].weights.dim(), (2, 3));
        assert_eq!(m.layers()[0].bias.len(), 3);
        assert_eq!(m.layers()[1].bias.len(), 2);
        assert!(m.layers().iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        let limit = (6.0f64 / 5.0).sqrt();
        assert!(m.layers()[0].weights.iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn init_deterministic_per_seed() {
        let a = Model::init(tiny_arch(3, 0.0), 7).unwrap();
        let b = Model::init(tiny_arch(3, 0.0), 7).unwrap();
        let c = Model::init(tiny_arch(3, 0.0), 8).unwrap();
        assert_eq!(a, b);
        for (la, lc) in a.layers().iter().zip(c.layers()) {
            assert!(la.weights.iter().zip(lc.weights.iter()).all(|(x, y)| x != y));
        }
    }

    #[test]
    fn invalid_architectures() {
        assert!(Architecture::new(2, vec![3, 0], 2, 0.0).is_err());
        assert!(Architecture::new(2, vec![], 2, 0.0).is_err());
        assert!(Architecture::new(2, vec![3], 1, 0.0).is_err());
        assert!(Architecture::new(0, vec![3], 2, 0.0).is_err());
        assert!(Architecture::new(2, vec![3], 2, 1.0).is_err());
    }

    fn identity_model() -> Model {
        let arch = tiny_arch(2, 0.0);
        let layers = vec![
            DenseLayer { weights: array![[1.0, 0.0], [0.0, 1.0]], bias: array![0.0, 0.0] },
            DenseLayer { weights: Array2::zeros((2, 2)), bias: array![0.0, 0.0] },
        ];
        Model::from_layers(arch, layers, 0).unwrap()
    }

    #[test]
    fn relu_clamps_negatives() {
        let m = identity_model();
        let out = m.forward(array![[-3.0, 5.0]].view(), true, Mode::Eval).unwrap();
        assert_eq!(out.hidden[0], array![[0.0, 5.0]]);
        // zero output weights give logits [0, 0]
        assert_eq!(out.probabilities, array![[0.5, 0.5]]);
    }

    #[test]
    fn dimension_mismatch() {
        let m = identity_model();
        assert!(matches!(m.forward(array![[1.0, 2.0, 3.0]].view(), false, Mode::Eval), Err(MlpError::Shape { .. })));
        assert!(matches!(m.loss(array![[1.0, 2.0]].view(), &[5]), Err(MlpError::LabelOutOfRange { .. })));
    }

    #[test]
    fn eval_is_dropout_free() {
        let m = Model::init(Architecture::new(4, vec![16, 8], 3, 0.5).unwrap(), 1).unwrap();
        let x = Array2::from_shape_fn((5, 4), |(i, j)| (i * 4 + j) as f64 / 10.0 - 0.8);
        let a = m.forward(x.view(), true, Mode::Eval).unwrap();
        let b = m.forward(x.view(), true, Mode::Eval).unwrap();
        assert_eq!(a.hidden, b.hidden);
        let mut rng = crate::seed::rng(3);
        let t = m.forward(x.view(), false, Mode::Train(&mut rng)).unwrap();
        assert_ne!(t.probabilities, a.probabilities);
    }

    #[test]
    fn zero_learning_rate_is_noop() {
        let mut m = Model::init(Architecture::new(3, vec![5], 2, 0.2).unwrap(), 4).unwrap();
        let before = m.clone();
        let x = array![[0.1, 0.2, 0.3], [0.5, -0.1, 0.0]];
        let loss = m.train_step(x.view(), &[0, 1], 0.0, &mut crate::seed::rng(0)).unwrap();
        assert!(loss.is_finite());
        assert_eq!(m, before);
    }

    #[test]
    fn diverged_loss_is_an_error() {
        let mut m = identity_model();
        m.layers_mut()[1].weights[[0, 0]] = f64::NAN;
        let before = m.clone();
        let err = m.train_step(array![[1.0, 1.0]].view(), &[0], 0.1, &mut crate::seed::rng(0)).unwrap_err();
        assert!(matches!(err, MlpError::Diverged(_)));
        assert_eq!(format!("{:?}", m.layers()), format!("{:?}", before.layers()));
    }

    proptest! {
        #[test]
        fn softmax_shift_invariant(z in proptest::collection::vec(-30.0f64..30.0, 2..8), c in -100.0f64..100.0) {
            let a = softmax(&Array2::from_shape_vec((1, z.len()), z.clone()).unwrap());
            let b = softmax(&Array2::from_shape_vec((1, z.len()), z.iter().map(|v| v + c).collect()).unwrap());
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert!((a.sum() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn outputs_are_distributions(seed in any::<u64>(), rows in 1usize..6) {
            let m = Model::init(Architecture::new(3, vec![7, 4], 4, 0.0).unwrap(), seed).unwrap();
            let x = Array2::from_shape_fn((rows, 3), |(i, j)| ((seed >> (i + j)) % 97) as f64 / 10.0 - 4.0);
            let out = m.forward(x.view(), true, Mode::Eval).unwrap();
            for row in out.probabilities.rows() {
                prop_assert!((row.sum() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|&p| p >= 0.0));
            }
            prop_assert!(out.hidden.iter().all(|h| h.iter().all(|&v| v >= 0.0)));
        }
    }
}
