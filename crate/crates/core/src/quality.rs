//! Modularity of disjoint partitions and overlapping covers.
//!
//! All three scores sum over ordered node pairs including `v = w`, with
//! weighted degrees `k_v = Σ_w A_vw` and `2m = Σ_v k_v`:
//!
//! * no overlap: `Q = 1/2m Σ_{v,w} (A_vw − γ k_v k_w / 2m) δ(C_v, C_w)`
//! * unweighted overlap (binarized edges): pairs inside each community are
//!   damped by `1 / (O_v O_w)`, `O_v` being the number of communities
//!   containing `v`
//! * weighted overlap: pairs inside community `c` are weighted by the
//!   belonging coefficients `α_cv α_cw`, where `α_cv` is the share of `v`'s
//!   edge weight that goes into `c` among the communities containing `v`

use std::collections::BTreeSet;

use thiserror::Error;

use crate::activation::ClassMeanActivations;
use crate::community::Partition;
use crate::graph::WeightedGraph;
use crate::pattern_graph::RepresentativeSets;

#[derive(Debug, Error, PartialEq)]
pub enum QualityError {
    #[error("modularity is undefined for a graph without edges")]
    NoEdges,
    #[error("assignment covers {found} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
}

/// Possibly overlapping communities. Every node belongs to at least one:
/// nodes missing from all given communities form a trailing residual
/// community.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    nodes: usize,
    communities: Vec<Vec<usize>>,
    memberships: Vec<usize>,
}

impl Cover {
    /// # Panics
    /// If a member id is `>= nodes`.
    pub fn new(nodes: usize, communities: Vec<Vec<usize>>) -> Self {
        let mut communities: Vec<Vec<usize>> = communities
            .into_iter()
            .map(|c| c.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        let mut memberships = vec![0; nodes];
        for c in &communities {
            for &v in c {
                assert!(v < nodes, "member {v} outside {nodes} nodes");
                memberships[v] += 1;
            }
        }
        let residual: Vec<usize> = (0..nodes).filter(|&v| memberships[v] == 0).collect();
        if !residual.is_empty() {
            for &v in &residual {
                memberships[v] = 1;
            }
            communities.push(residual);
        }
        Self { nodes, communities, memberships }
    }

    pub fn from_partition(p: &Partition) -> Self {
        let mut communities = vec![Vec::new(); p.count()];
        for (v, &c) in p.assignment().iter().enumerate() {
            communities[c].push(v);
        }
        Self::new(p.len(), communities)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    /// `O_v`.
    pub fn membership_count(&self, v: usize) -> usize {
        self.memberships[v]
    }
}

fn check(graph: &WeightedGraph, nodes: usize) -> Result<f64, QualityError> {
    if nodes != graph.node_count() {
        return Err(QualityError::SizeMismatch { expected: graph.node_count(), found: nodes });
    }
    let two_m = graph.total_weight();
    if two_m <= 0.0 {
        return Err(QualityError::NoEdges);
    }
    Ok(two_m)
}

/// Resolution-scaled modularity `Q_γ` of a disjoint partition.
pub fn modularity_with_resolution(graph: &WeightedGraph, partition: &Partition, resolution: f64) -> Result<f64, QualityError> {
    let two_m = check(graph, partition.len())?;
    let assignment = partition.assignment();
    let mut internal = vec![0f64; partition.count()];
    let mut totals = vec![0f64; partition.count()];
    for v in 0..graph.node_count() {
        let c = assignment[v];
        totals[c] += graph.degree(v);
        internal[c] += graph.neighbors(v).iter().filter(|&&(w, _)| assignment[w] == c).map(|&(_, a)| a).sum::<f64>();
    }
    Ok(internal.iter().zip(&totals).map(|(&i, &t)| i / two_m - resolution * (t / two_m) * (t / two_m)).sum())
}

pub fn modularity_no_overlap(graph: &WeightedGraph, partition: &Partition) -> Result<f64, QualityError> {
    modularity_with_resolution(graph, partition, 1.0)
}

/// Overlap modularity on the binarized graph with `1 / (O_v O_w)` damping.
pub fn modularity_unweighted_overlap(graph: &WeightedGraph, cover: &Cover) -> Result<f64, QualityError> {
    let binary = graph.binarized();
    let two_m = check(&binary, cover.node_count())?;
    let inv: Vec<f64> = (0..cover.node_count()).map(|v| 1.0 / cover.membership_count(v) as f64).collect();
    let mut member = vec![false; cover.node_count()];
    let mut q = 0.0;
    for c in cover.communities() {
        c.iter().for_each(|&v| member[v] = true);
        let mut edges = 0.0;
        let mut expected = 0.0;
        for &v in c {
            edges += inv[v] * binary.neighbors(v).iter().filter(|&&(w, _)| member[w]).map(|&(w, a)| a * inv[w]).sum::<f64>();
            expected += binary.degree(v) * inv[v];
        }
        q += edges - expected * expected / two_m;
        c.iter().for_each(|&v| member[v] = false);
    }
    Ok(q / two_m)
}

/// `α_cv` for every community `c` and member `v`, stored per community in
/// member order.
#[derive(Debug, Clone, PartialEq)]
pub struct BelongingCoefficients {
    nodes: usize,
    communities: Vec<Vec<usize>>,
    values: Vec<Vec<f64>>,
}

impl BelongingCoefficients {
    /// `α_cv`; zero when `v` is not in `c`.
    pub fn get(&self, c: usize, v: usize) -> f64 {
        self.communities[c].binary_search(&v).map_or(0.0, |i| self.values[c][i])
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }
}

/// `α_cv = k_cv / Σ_{c' ∋ v} k_c'v` with `k_cv = Σ_{p ∈ c} W_vp`. A node
/// with no weight into any of its communities is spread uniformly over them.
pub fn belonging_coefficients(graph: &WeightedGraph, cover: &Cover) -> BelongingCoefficients {
    let n = cover.node_count();
    let mut member = vec![false; n];
    let mut k_in: Vec<Vec<f64>> = Vec::with_capacity(cover.communities().len());
    let mut totals = vec![0f64; n];
    for c in cover.communities() {
        c.iter().for_each(|&v| member[v] = true);
        let row: Vec<f64> = c
            .iter()
            .map(|&v| graph.neighbors(v).iter().filter(|&&(p, _)| member[p]).map(|&(_, w)| w).sum())
            .collect();
        for (&v, &k) in c.iter().zip(&row) {
            totals[v] += k;
        }
        k_in.push(row);
        c.iter().for_each(|&v| member[v] = false);
    }
    let values = cover
        .communities()
        .iter()
        .zip(k_in)
        .map(|(c, row)| {
            c.iter()
                .zip(row)
                .map(|(&v, k)| if totals[v] > 0.0 { k / totals[v] } else { 1.0 / cover.membership_count(v) as f64 })
                .collect()
        })
        .collect();
    BelongingCoefficients { nodes: n, communities: cover.communities().to_vec(), values }
}

/// Weighted overlap modularity with belonging coefficients.
pub fn modularity_weighted_overlap(graph: &WeightedGraph, cover: &Cover) -> Result<f64, QualityError> {
    let two_m = check(graph, cover.node_count())?;
    let alpha = belonging_coefficients(graph, cover);
    let mut weight = vec![0f64; cover.node_count()];
    let mut q = 0.0;
    for (ci, c) in cover.communities().iter().enumerate() {
        for (&v, &a) in c.iter().zip(&alpha.values[ci]) {
            weight[v] = a;
        }
        let mut edges = 0.0;
        let mut expected = 0.0;
        for &v in c {
            edges += weight[v] * graph.neighbors(v).iter().map(|&(w, a)| a * weight[w]).sum::<f64>();
            expected += graph.degree(v) * weight[v];
        }
        q += edges - expected * expected / two_m;
        c.iter().for_each(|&v| weight[v] = 0.0);
    }
    Ok(q / two_m)
}

/// Disjoint partition of the union of `sets`: each neuron goes to the class
/// (among those whose set contains it) with the largest mean activation,
/// lowest class id on ties. Node `i` is the `i`-th neuron of the sorted union
/// and community ids are renumbered densely in class order.
pub fn partition_from_covers(means: &ClassMeanActivations, sets: &RepresentativeSets) -> Partition {
    let nodes = sets.union();
    let raw: Vec<usize> = nodes
        .iter()
        .map(|&q| {
            let mut best: Option<(usize, f64)> = None;
            for class in sets.memberships(q) {
                let v = means.get(class, sets.layer).map_or(f64::NEG_INFINITY, |m| m[q]);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((class, v));
                }
            }
            best.expect("every union member belongs to a set").0
        })
        .collect();
    let used: BTreeSet<usize> = raw.iter().copied().collect();
    let dense: Vec<usize> = raw.iter().map(|c| used.range(..c).count()).collect();
    Partition::new(dense).expect("dense ids")
}
