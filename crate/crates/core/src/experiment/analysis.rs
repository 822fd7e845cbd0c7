use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{io_err, ExperimentConfig, ExperimentError, Metric};
use crate::activation::{normalize_columns, record_activations, write_activations, ClassMeanActivations};
use crate::community::{community_sizes, kernighan_lin_bisect, louvain, Partition};
use crate::dataset::Dataset;
use crate::entropy::{class_entropy, model_entropy};
use crate::mlp::Model;
use crate::pattern_graph::{layer_pattern_graph, unique_neuron_matrix, PatternGraph, UniqueNeuronMatrix};
use crate::quality::{
    modularity_no_overlap, modularity_unweighted_overlap, modularity_weighted_overlap, modularity_with_resolution, partition_from_covers,
};
use crate::seed::{derive_indexed, StageSeeds};

/// Metrics of one hidden layer at one snapshot. `None` marks a value that
/// is undefined (edgeless graph) or was not requested.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerAnalysis {
    pub node_count: usize,
    pub edge_count: usize,
    pub total_weight: f64,
    pub klb: Option<f64>,
    pub klb_cut: Option<f64>,
    pub no_overlap: Option<f64>,
    pub unweighted_overlap: Option<f64>,
    pub weighted_overlap: Option<f64>,
    pub louvain_q: Option<f64>,
    pub louvain_communities: Option<usize>,
    /// Graph nodes per Louvain community.
    pub avg_community_size: Option<f64>,
    /// Louvain community sizes, descending.
    pub community_sizes: Vec<usize>,
    pub unique: UniqueNeuronMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotAnalysis {
    pub layers: Vec<LayerAnalysis>,
    pub model_entropy: Option<f64>,
    /// Indexed by class; `None` for classes without captured samples.
    pub class_entropy: Vec<Option<f64>>,
    pub dead_neurons: usize,
}

fn export(path: &Path, write: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), ExperimentError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Captures activations for snapshot `k` and computes every requested
/// metric. Graph files go to `graph_dir` and the activation matrix to
/// `activation_dir` when given.
pub fn analyze_snapshot(
    config: &ExperimentConfig,
    model: &Model,
    data: &Dataset,
    k: usize,
    graph_dir: Option<&Path>,
    activation_dir: Option<&Path>,
) -> Result<SnapshotAnalysis, ExperimentError> {
    let seeds = StageSeeds::from_master(config.seed);
    let f = record_activations(model, data, config.capture_cap).map_err(|e| ExperimentError::stage("capture", Some(k), e))?;
    if let Some(dir) = activation_dir {
        let p = dir.join(format!("snapshot_{:02}.ngact", k + 1));
        let file = fs::File::create(&p).map_err(io_err(&p))?;
        write_activations(BufWriter::new(file), &f).map_err(|e| ExperimentError::stage("capture", Some(k), e))?;
    }
    let means = ClassMeanActivations::compute(&f);
    let mut layers = Vec::with_capacity(f.layer_count());
    for layer in 0..f.layer_count() {
        let (sets, pg) = layer_pattern_graph(&f, &means, layer, config.neurons_per_class)
            .map_err(|e| ExperimentError::stage("pattern-graph", Some(k), e))?;
        let g = &pg.graph;
        let graph_seed = (k as u64) << 16 | layer as u64;
        let defined = g.edge_count() > 0;
        let quality = |r: Result<f64, crate::quality::QualityError>| r.map_err(|e| ExperimentError::stage("quality", Some(k), e));

        let louvain_part = if defined && config.wants(Metric::Louvain) {
            let p = louvain(g, config.resolution, derive_indexed(seeds.louvain, graph_seed))
                .map_err(|e| ExperimentError::stage("louvain", Some(k), e))?;
            Some(p)
        } else {
            None
        };
        let klb_part = if defined && pg.node_count() >= 2 && config.wants(Metric::Klb) {
            let p = kernighan_lin_bisect(g, derive_indexed(seeds.klb, graph_seed), config.klb_max_passes)
                .map_err(|e| ExperimentError::stage("kernighan-lin", Some(k), e))?;
            Some(p)
        } else {
            None
        };
        let cover = pg.cover(&sets);
        let no_overlap = match defined && config.wants(Metric::NoOverlap) {
            true => Some(quality(modularity_no_overlap(g, &partition_from_covers(&means, &sets)))?),
            false => None,
        };
        let unweighted_overlap = match defined && config.wants(Metric::UnweightedOverlap) {
            true => Some(quality(modularity_unweighted_overlap(g, &cover))?),
            false => None,
        };
        let weighted_overlap = match defined && config.wants(Metric::WeightedOverlap) {
            true => Some(quality(modularity_weighted_overlap(g, &cover))?),
            false => None,
        };
        let klb = klb_part.as_ref().map(|p| quality(modularity_no_overlap(g, p))).transpose()?;
        let louvain_q = louvain_part.as_ref().map(|p| quality(modularity_with_resolution(g, p, config.resolution))).transpose()?;

        if let Some(dir) = graph_dir {
            let stem = format!("snapshot_{:02}_layer_{}", k + 1, layer + 1);
            export(&dir.join(format!("{stem}.edges.csv")), |w| pg.write_edge_list(w))?;
            export(&dir.join(format!("{stem}.membership.csv")), |w| pg.write_membership(&sets, w))?;
            for (name, part) in [("louvain", &louvain_part), ("klb", &klb_part)] {
                if let Some(p) = part {
                    export(&dir.join(format!("{stem}.{name}.csv")), |w| p.write_csv(&pg.neurons, w))?;
                }
            }
        }
        layers.push(layer_summary(&pg, louvain_part.as_ref(), klb_part.as_ref(), klb, no_overlap, unweighted_overlap, weighted_overlap, louvain_q, unique_neuron_matrix(&sets)));
    }

    let (model_entropy, class_entropy, dead_neurons) = if config.wants(Metric::Entropy) {
        let whole = model_entropy(&normalize_columns(&f), &config.entropy);
        let per_class = (0..f.class_count()).map(|c| class_entropy(&f, c, &config.entropy).ok().map(|r| r.total)).collect();
        (Some(whole.total), per_class, whole.dead.len())
    } else {
        (None, vec![None; f.class_count()], normalize_columns(&f).dead_columns().len())
    };
    Ok(SnapshotAnalysis { layers, model_entropy, class_entropy, dead_neurons })
}

#[allow(clippy::too_many_arguments)]
fn layer_summary(
    pg: &PatternGraph,
    louvain_part: Option<&Partition>,
    klb_part: Option<&Partition>,
    klb: Option<f64>,
    no_overlap: Option<f64>,
    unweighted_overlap: Option<f64>,
    weighted_overlap: Option<f64>,
    louvain_q: Option<f64>,
    unique: UniqueNeuronMatrix,
) -> LayerAnalysis {
    let g = &pg.graph;
    LayerAnalysis {
        node_count: pg.node_count(),
        edge_count: g.edge_count(),
        total_weight: g.total_weight() / 2.0,
        klb,
        klb_cut: klb_part.map(|p| crate::community::cut_weight(g, p)),
        no_overlap,
        unweighted_overlap,
        weighted_overlap,
        louvain_q,
        louvain_communities: louvain_part.map(Partition::count),
        avg_community_size: louvain_part.map(|p| pg.node_count() as f64 / p.count() as f64),
        community_sizes: louvain_part.map(community_sizes).unwrap_or_default(),
        unique,
    }
}
