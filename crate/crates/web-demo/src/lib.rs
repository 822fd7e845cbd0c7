//! WebAssembly bindings for the static demo page in `www/`.
//!
//! A [`Session`] trains a small network on synthetic blobs once and keeps
//! its snapshots; the page then queries it interactively. Every method
//! returns a JSON string.

use neurograph::activation::{normalize_columns, record_activations, ClassMeanActivations};
use neurograph::community::{louvain, Partition};
use neurograph::dataset::{synth_blobs, Dataset};
use neurograph::entropy::{histogram, model_entropy, neuron_entropy, normalize_series};
use neurograph::mlp::{train_with_snapshots, Snapshot};
use neurograph::pattern_graph::layer_pattern_graph;
use neurograph::quality::{modularity_unweighted_overlap, modularity_weighted_overlap, modularity_with_resolution};
use neurograph::seed::StageSeeds;
use neurograph::{ActivationMatrix, Architecture, EntropyConfig, LogBase, TrainConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const CLASSES: usize = 4;
const DIM: usize = 8;
const CAPTURE: usize = 200;

#[wasm_bindgen]
pub struct Session {
    train: Dataset,
    snapshots: Vec<Snapshot>,
    activations: Vec<ActivationMatrix>,
}

#[derive(Serialize)]
struct Curve {
    iterations: Vec<usize>,
    train_accuracy: Vec<f64>,
    test_accuracy: Vec<f64>,
    entropy: Vec<f64>,
    normalized_entropy: Vec<f64>,
}

#[derive(Serialize)]
struct GraphView {
    neurons: Vec<usize>,
    edges: Vec<(usize, usize, f64)>,
    community: Vec<usize>,
    communities: usize,
    modularity: Option<f64>,
    unweighted_overlap: Option<f64>,
    weighted_overlap: Option<f64>,
}

#[derive(Serialize)]
struct HistogramView {
    counts: Vec<usize>,
    entropy: f64,
    max_entropy: f64,
    dead: bool,
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("serializable view")
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

impl Session {
    /// Trains a `DIM`-`hidden`-`hidden`-`CLASSES` network and records
    /// activations at every snapshot.
    pub fn train(seed: u64, hidden: usize, epochs: usize, snapshots: usize, spread: f64) -> Result<Session, String> {
        let seeds = StageSeeds::from_master(seed);
        let (train, test) = synth_blobs(CLASSES, 150, DIM, spread, seeds.synthetic);
        let arch = Architecture::new(DIM, vec![hidden, hidden], CLASSES, 0.2).map_err(err)?;
        let config = TrainConfig {
            epochs,
            batch_size: 32,
            learning_rate: 0.05,
            snapshot_count: snapshots,
            init_seed: seeds.init,
            dropout_seed: seeds.dropout,
            order_seed: seeds.batch_order,
        };
        let series = train_with_snapshots(&arch, &train, &test, &config).map_err(err)?;
        let activations = series
            .snapshots
            .iter()
            .map(|s| record_activations(&s.model, &train, CAPTURE))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(Session { train, snapshots: series.snapshots, activations })
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots.len()
    }

    pub fn hidden_neurons(&self) -> usize {
        self.activations.first().map_or(0, |f| f.cols())
    }

    pub fn samples(&self) -> usize {
        self.train.len()
    }

    /// Accuracy and model entropy per snapshot.
    pub fn curve_json(&self, bins: usize) -> Result<String, String> {
        let config = EntropyConfig::new(bins, LogBase::Two).map_err(err)?;
        let entropy: Vec<f64> = self.activations.iter().map(|f| model_entropy(&normalize_columns(f), &config).total).collect();
        let normalized = normalize_series(&entropy).map_err(err)?;
        Ok(to_json(&Curve {
            iterations: self.snapshots.iter().map(|s| s.iteration).collect(),
            train_accuracy: self.snapshots.iter().map(|s| s.train_accuracy).collect(),
            test_accuracy: self.snapshots.iter().map(|s| s.test_accuracy).collect(),
            entropy,
            normalized_entropy: normalized.values,
        }))
    }

    /// Pattern graph of one layer with Louvain communities at `resolution`.
    /// `layer` and `snapshot` count from 0.
    pub fn graph_json(&self, snapshot: usize, layer: usize, per_class: usize, resolution: f64, seed: u64) -> Result<String, String> {
        let f = self.activations.get(snapshot).ok_or_else(|| "snapshot out of range".to_string())?;
        let means = ClassMeanActivations::compute(f);
        let (sets, pg) = layer_pattern_graph(f, &means, layer, per_class).map_err(err)?;
        let g = &pg.graph;
        let partition = if g.edge_count() > 0 { louvain(g, resolution, seed).map_err(err)? } else { Partition::singletons(pg.node_count()) };
        let defined = g.edge_count() > 0;
        let cover = pg.cover(&sets);
        Ok(to_json(&GraphView {
            neurons: pg.neurons.clone(),
            edges: g.edges().collect(),
            community: partition.assignment().to_vec(),
            communities: partition.count(),
            modularity: defined.then(|| modularity_with_resolution(g, &partition, resolution).ok()).flatten(),
            unweighted_overlap: defined.then(|| modularity_unweighted_overlap(g, &cover).ok()).flatten(),
            weighted_overlap: defined.then(|| modularity_weighted_overlap(g, &cover).ok()).flatten(),
        }))
    }

    /// Histogram of one neuron's normalized nonzero activations.
    pub fn histogram_json(&self, snapshot: usize, neuron: usize, bins: usize) -> Result<String, String> {
        let f = self.activations.get(snapshot).ok_or_else(|| "snapshot out of range".to_string())?;
        if neuron >= f.cols() {
            return Err("neuron out of range".into());
        }
        let config = EntropyConfig::new(bins, LogBase::Two).map_err(err)?;
        let column = normalize_columns(f).column(neuron);
        let (entropy, dead) = neuron_entropy(&column, &config);
        Ok(to_json(&HistogramView {
            counts: histogram(&column, bins).unwrap_or_else(|| vec![0; bins]),
            entropy,
            max_entropy: config.max_entropy(),
            dead,
        }))
    }
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, hidden: usize, epochs: usize, snapshots: usize, spread: f64) -> Result<Session, JsError> {
        Session::train(u64::from(seed), hidden, epochs, snapshots, spread).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter, js_name = snapshotCount)]
    pub fn js_snapshot_count(&self) -> usize {
        self.snapshot_count()
    }

    #[wasm_bindgen(getter, js_name = hiddenNeurons)]
    pub fn js_hidden_neurons(&self) -> usize {
        self.hidden_neurons()
    }

    pub fn curve(&self, bins: usize) -> Result<String, JsError> {
        js(self.curve_json(bins))
    }

    pub fn graph(&self, snapshot: usize, layer: usize, per_class: usize, resolution: f64, seed: u32) -> Result<String, JsError> {
        js(self.graph_json(snapshot, layer, per_class, resolution, u64::from(seed)))
    }

    pub fn histogram(&self, snapshot: usize, neuron: usize, bins: usize) -> Result<String, JsError> {
        js(self.histogram_json(snapshot, neuron, bins))
    }
}
