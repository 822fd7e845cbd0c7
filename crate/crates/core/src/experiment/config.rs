use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::entropy::EntropyConfig;

pub const CONFIG_SCHEMA: &str = "neurograph.experiment/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// MNIST-style IDX files (optionally gzip-compressed).
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        /// Stratified training subset size; `null` keeps the full set.
        #[serde(default = "default_train_subset")]
        train_subset: Option<usize>,
        #[serde(default)]
        test_subset: Option<usize>,
    },
    Synthetic {
        class_count: usize,
        per_class: usize,
        dim: usize,
        spread: f64,
    },
}

fn default_train_subset() -> Option<usize> {
    Some(10_000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_dropout")]
    pub dropout_rate: f64,
}

fn default_dropout() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSpec {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
}

fn default_epochs() -> usize {
    20
}
fn default_batch() -> usize {
    64
}
fn default_lr() -> f64 {
    0.01
}

impl Default for TrainingSpec {
    fn default() -> Self {
        Self { epochs: default_epochs(), batch_size: default_batch(), learning_rate: default_lr() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Klb,
    NoOverlap,
    UnweightedOverlap,
    WeightedOverlap,
    Louvain,
    Entropy,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Klb, Metric::NoOverlap, Metric::UnweightedOverlap, Metric::WeightedOverlap, Metric::Louvain, Metric::Entropy];
}

fn all_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}
fn default_snapshots() -> usize {
    20
}
fn default_cap() -> usize {
    2000
}
fn default_s() -> usize {
    50
}
fn default_resolution() -> f64 {
    2.0
}
fn default_klb_passes() -> usize {
    10
}
fn yes() -> bool {
    true
}

/// Versioned JSON experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub dataset: DatasetSpec,
    /// Replace labels by a seeded permutation (both splits, independently).
    #[serde(default)]
    pub mixed: bool,
    pub architecture: ArchitectureSpec,
    #[serde(default)]
    pub training: TrainingSpec,
    #[serde(default = "default_snapshots")]
    pub snapshot_count: usize,
    /// Stratified row cap for the activation matrix.
    #[serde(default = "default_cap")]
    pub capture_cap: usize,
    /// Representative neurons per class and layer.
    #[serde(default = "default_s")]
    pub neurons_per_class: usize,
    #[serde(default)]
    pub entropy: EntropyConfig,
    /// Louvain γ, scaling the null-model term. Gephi's resolution r corresponds to γ = 1/r.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_klb_passes")]
    pub klb_max_passes: usize,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<Metric>,
    /// Master seed; every stage seed derives from it.
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub export_graphs: bool,
    #[serde(default)]
    pub persist_activations: bool,
}

impl ExperimentConfig {
    /// Small synthetic configuration with the given master seed.
    pub fn synthetic(class_count: usize, per_class: usize, dim: usize, spread: f64, hidden_sizes: Vec<usize>, seed: u64) -> Self {
        Self {
            schema: CONFIG_SCHEMA.to_string(),
            dataset: DatasetSpec::Synthetic { class_count, per_class, dim, spread },
            mixed: false,
            architecture: ArchitectureSpec { hidden_sizes, dropout_rate: default_dropout() },
            training: TrainingSpec::default(),
            snapshot_count: default_snapshots(),
            capture_cap: default_cap(),
            neurons_per_class: default_s(),
            entropy: EntropyConfig::default(),
            resolution: default_resolution(),
            klb_max_passes: default_klb_passes(),
            metrics: all_metrics(),
            seed,
            output_dir: None,
            export_graphs: true,
            persist_activations: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative dataset and output paths are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = std::path::absolute(base).unwrap_or_else(|_| base.to_path_buf());
        config.resolve_paths(&base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DatasetSpec::Idx { train_images, train_labels, test_images, test_labels, .. } = &mut self.dataset {
            fix(train_images);
            fix(train_labels);
            fix(test_images);
            fix(test_labels);
        }
        if let Some(out) = &mut self.output_dir {
            fix(out);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.schema != CONFIG_SCHEMA {
            return bad(format!("unsupported schema {:?}; expected {CONFIG_SCHEMA:?}", self.schema));
        }
        if self.snapshot_count < 2 {
            return bad("snapshot_count must be at least 2".into());
        }
        if self.neurons_per_class == 0 {
            return bad("neurons_per_class must be at least 1".into());
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return bad("resolution must be positive".into());
        }
        if self.entropy.bins < 2 {
            return bad("entropy.bins must be at least 2".into());
        }
        if self.architecture.hidden_sizes.is_empty() || self.architecture.hidden_sizes.contains(&0) {
            return bad("architecture.hidden_sizes must be non-empty positive widths".into());
        }
        if !(0.0..1.0).contains(&self.architecture.dropout_rate) {
            return bad("architecture.dropout_rate must lie in [0, 1)".into());
        }
        if self.training.epochs == 0 || self.training.batch_size == 0 || !(self.training.learning_rate >= 0.0) {
            return bad("training needs positive epochs and batch_size and a non-negative learning rate".into());
        }
        if let DatasetSpec::Synthetic { class_count, per_class, dim, spread } = &self.dataset {
            if *class_count < 2 || *per_class < 2 || *dim == 0 || !(*spread >= 0.0) {
                return bad("synthetic dataset needs class_count >= 2, per_class >= 2, dim >= 1, spread >= 0".into());
            }
        }
        Ok(())
    }

    pub fn wants(&self, metric: Metric) -> bool {
        self.metrics.contains(&metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(
            r#"{"schema":"neurograph.experiment/v1","seed":3,
                "dataset":{"source":"idx","train_images":"a","train_labels":"b","test_images":"c","test_labels":"d"},
                "architecture":{"hidden_sizes":[512,512]}}"#,
        )
        .unwrap();
        assert_eq!(c.snapshot_count, 20);
        assert_eq!(c.neurons_per_class, 50);
        assert_eq!(c.resolution, 2.0);
        assert_eq!(c.training, TrainingSpec { epochs: 20, batch_size: 64, learning_rate: 0.01 });
        assert_eq!(c.architecture.dropout_rate, 0.2);
        assert_eq!(c.entropy.bins, 10);
        assert!(matches!(c.dataset, DatasetSpec::Idx { train_subset: Some(10_000), test_subset: None, .. }));
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let good = ExperimentConfig::synthetic(3, 10, 4, 0.1, vec![8], 1);
        for (mutate, what) in [
            (Box::new(|c: &mut ExperimentConfig| c.snapshot_count = 1) as Box<dyn Fn(&mut ExperimentConfig)>, "snapshots"),
            (Box::new(|c: &mut ExperimentConfig| c.neurons_per_class = 0), "S"),
            (Box::new(|c: &mut ExperimentConfig| c.schema = "v0".into()), "schema"),
            (Box::new(|c: &mut ExperimentConfig| c.resolution = 0.0), "resolution"),
        ] {
            let mut c = good.clone();
            mutate(&mut c);
            assert!(c.validate().is_err(), "{what}");
        }
        assert!(ExperimentConfig::from_json("{\"schema\": 1}").is_err());
        assert!(ExperimentConfig::from_json(&good.to_json().replace("\"mixed\"", "\"mixd\"")).is_err());
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(
            &p,
            r#"{"schema":"neurograph.experiment/v1","seed":3,
                "dataset":{"source":"idx","train_images":"data/a","train_labels":"/abs/b","test_images":"c","test_labels":"d"},
                "architecture":{"hidden_sizes":[4]}}"#,
        )
        .unwrap();
        let c = ExperimentConfig::load(&p).unwrap();
        let DatasetSpec::Idx { train_images, train_labels, .. } = c.dataset else { panic!() };
        assert_eq!(train_images, dir.path().join("data/a"));
        assert_eq!(train_labels, PathBuf::from("/abs/b"));
    }
}
