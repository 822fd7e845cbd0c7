//! Activation pattern graphs.
//!
//! For one hidden layer, every class contributes its `S` most active neurons
//! (by class-mean activation). The union of these sets forms the node set.
//! Two neurons `p, q` of the same class set are linked with weight
//! `δ_pq / |D_i|`, where `δ_pq` counts class samples on which both fire
//! strictly above their own class mean; per-class matrices are summed.

use std::collections::BTreeSet;
use std::io::Write;

use thiserror::Error;

use crate::activation::{ActivationError, ActivationMatrix, ClassMeanActivations};
use crate::graph::WeightedGraph;
use crate::quality::Cover;

#[derive(Debug, Error)]
pub enum PatternGraphError {
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("adjacency dimension mismatch: expected {expected} nodes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Activation(#[from] ActivationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-class top-`S` neuron sets within one layer. Neuron ids are local to
/// the layer and each set is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentativeSets {
    pub layer: usize,
    pub sets: Vec<Vec<usize>>,
}

impl RepresentativeSets {
    pub fn class_count(&self) -> usize {
        self.sets.len()
    }

    /// Sorted union of all sets.
    pub fn union(&self) -> Vec<usize> {
        self.sets.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Classes whose set contains `neuron`, ascending.
    pub fn memberships(&self, neuron: usize) -> Vec<usize> {
        (0..self.sets.len()).filter(|&c| self.sets[c].binary_search(&neuron).is_ok()).collect()
    }
}

/// Selects, per class, the `s` neurons of `layer` with the largest mean
/// activation; ties go to the lower neuron id. Classes without samples get
/// an empty set.
pub fn top_s_neurons(means: &ClassMeanActivations, layer: usize, s: usize) -> RepresentativeSets {
    let sets = (0..means.class_count())
        .map(|class| match means.get(class, layer) {
            None => Vec::new(),
            Some(v) => {
                let mut ids: Vec<usize> = (0..v.len()).collect();
                ids.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
                ids.truncate(s);
                ids.sort_unstable();
                ids
            }
        })
        .collect();
    RepresentativeSets { layer, sets }
}

/// Dense symmetric adjacency over a fixed node list.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAdjacency {
    /// Layer-local neuron ids of the rows/columns.
    pub nodes: Vec<usize>,
    /// Row-major `nodes.len()²` weights.
    pub weights: Vec<f64>,
}

impl ClassAdjacency {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.nodes.len() + b]
    }
}

/// Co-activation adjacency `A_{class, layer}` indexed by `nodes` (normally
/// the union of all representative sets).
pub fn coactivation_matrix(
    f: &ActivationMatrix,
    means: &ClassMeanActivations,
    sets: &RepresentativeSets,
    nodes: &[usize],
    class: usize,
) -> Result<ClassAdjacency, PatternGraphError> {
    let layer = sets.layer;
    let cols = f.layer_columns(layer)?;
    let v = means.get(class, layer).ok_or(PatternGraphError::EmptyClass(class))?;
    let rows = f.class_rows(class);
    if rows.is_empty() {
        return Err(PatternGraphError::EmptyClass(class));
    }
    let n = nodes.len();
    let members: Vec<(usize, usize)> = sets.sets[class]
        .iter()
        .filter_map(|&neuron| nodes.binary_search(&neuron).ok().map(|idx| (idx, neuron)))
        .collect();
    let mut counts = vec![0u32; n * n];
    let mut active = Vec::with_capacity(members.len());
    for &r in &rows {
        let row = &f.row(r)[cols.clone()];
        active.clear();
        active.extend(members.iter().filter(|&&(_, q)| f64::from(row[q]) > v[q]).map(|&(idx, _)| idx));
        for (i, &a) in active.iter().enumerate() {
            for &b in &active[i + 1..] {
                counts[a * n + b] += 1;
                counts[b * n + a] += 1;
            }
        }
    }
    let size = rows.len() as f64;
    Ok(ClassAdjacency { nodes: nodes.to_vec(), weights: counts.into_iter().map(|c| f64::from(c) / size).collect() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternGraph {
    /// Layer-local neuron id of every graph node.
    pub neurons: Vec<usize>,
    pub graph: WeightedGraph,
}

impl PatternGraph {
    pub fn node_count(&self) -> usize {
        self.neurons.len()
    }

    /// Representative sets as an overlapping cover over graph node indices.
    pub fn cover(&self, sets: &RepresentativeSets) -> Cover {
        let communities = sets
            .sets
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.iter().filter_map(|q| self.neurons.binary_search(q).ok()).collect())
            .collect();
        Cover::new(self.node_count(), communities)
    }

    /// Writes `u,v,w` rows (layer-local neuron ids, `u < v`).
    pub fn write_edge_list(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "u,v,w")?;
        for (a, b, weight) in self.graph.edges() {
            writeln!(w, "{},{},{}", self.neurons[a], self.neurons[b], weight)?;
        }
        Ok(())
    }

    /// Writes `node,classes` rows; classes are `;`-separated.
    pub fn write_membership(&self, sets: &RepresentativeSets, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "node,classes")?;
        for &q in &self.neurons {
            let classes: Vec<String> = sets.memberships(q).iter().map(ToString::to_string).collect();
            writeln!(w, "{},{}", q, classes.join(";"))?;
        }
        Ok(())
    }
}

/// Element-wise sum of per-class adjacencies. Zero entries are not edges
/// and the diagonal is ignored.
pub fn build_graph(nodes: &[usize], per_class: &[ClassAdjacency]) -> Result<PatternGraph, PatternGraphError> {
    let n = nodes.len();
    let mut sum = vec![0f64; n * n];
    for adj in per_class {
        if adj.nodes.len() != n || adj.weights.len() != n * n {
            return Err(PatternGraphError::DimensionMismatch { expected: n, found: adj.nodes.len() });
        }
        for (s, &w) in sum.iter_mut().zip(&adj.weights) {
            *s += w;
        }
    }
    for i in 0..n {
        sum[i * n + i] = 0.0;
    }
    Ok(PatternGraph { neurons: nodes.to_vec(), graph: WeightedGraph::from_dense(n, &sum) })
}

/// Representative sets and pattern graph for one layer.
pub fn layer_pattern_graph(
    f: &ActivationMatrix,
    means: &ClassMeanActivations,
    layer: usize,
    s: usize,
) -> Result<(RepresentativeSets, PatternGraph), PatternGraphError> {
    f.layer_columns(layer)?;
    let sets = top_s_neurons(means, layer, s);
    let nodes = sets.union();
    let per_class = (0..sets.class_count())
        .filter(|&c| means.get(c, layer).is_some())
        .map(|c| coactivation_matrix(f, means, &sets, &nodes, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((sets.clone(), build_graph(&nodes, &per_class)?))
}

/// `k × k` counts of neurons that belong to exactly the sets of classes
/// `i` and `j` (diagonal: to class `i` alone).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqueNeuronMatrix {
    pub classes: usize,
    pub counts: Vec<usize>,
}

impl UniqueNeuronMatrix {
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.classes + j]
    }

    pub fn write_csv(&self, layer: usize, mut w: impl Write) -> std::io::Result<()> {
        for i in 0..self.classes {
            for j in 0..self.classes {
                writeln!(w, "{},{},{},{}", layer, i, j, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

pub fn unique_neuron_matrix(sets: &RepresentativeSets) -> UniqueNeuronMatrix {
    let k = sets.class_count();
    let mut counts = vec![0; k * k];
    for q in sets.union() {
        match sets.memberships(q)[..] {
            [i] => counts[i * k + i] += 1,
            [i, j] => {
                counts[i * k + j] += 1;
                counts[j * k + i] += 1;
            }
            _ => {}
        }
    }
    UniqueNeuronMatrix { classes: k, counts }
}
