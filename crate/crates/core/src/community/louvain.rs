//! Louvain modularity maximization with a resolution parameter.
//!
//! Each level seeds a visit order, moves single nodes to the neighbouring
//! community with the best strictly positive gain in `Q_γ` until a sweep
//! makes no move, then collapses communities into super-nodes.

use rand::seq::SliceRandom;

use super::{CommunityError, Partition};
use crate::graph::WeightedGraph;
use crate::quality::modularity_with_resolution;

/// Gains below this are treated as ties, so float noise cannot cycle moves.
const GAIN_EPS: f64 = 1e-12;

/// Final partition plus `Q_γ` of the original graph after every level
/// (index 0 is the all-singletons start).
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainTrace {
    pub partition: Partition,
    pub level_modularity: Vec<f64>,
}

pub fn louvain(graph: &WeightedGraph, resolution: f64, seed: u64) -> Result<Partition, CommunityError> {
    Ok(louvain_trace(graph, resolution, seed)?.partition)
}

pub fn louvain_trace(graph: &WeightedGraph, resolution: f64, seed: u64) -> Result<LouvainTrace, CommunityError> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(CommunityError::BadResolution(resolution));
    }
    let n = graph.node_count();
    if graph.total_weight() <= 0.0 {
        log::warn!("louvain: graph with {n} nodes has no edges; returning singletons");
        return Ok(LouvainTrace { partition: Partition::singletons(n).with_resolution(resolution), level_modularity: Vec::new() });
    }
    let q = |assignment: &[usize]| {
        let p = Partition::from_labels(assignment);
        modularity_with_resolution(graph, &p, resolution).expect("graph has edges")
    };
    let mut rng = crate::seed::rng(seed);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_modularity = vec![q(&membership)];
    let mut current = graph.clone();
    loop {
        let (local, moved) = one_level(&current, resolution, &mut rng);
        if !moved {
            break;
        }
        let communities = local.iter().max().map_or(0, |m| m + 1);
        for m in membership.iter_mut() {
            *m = local[*m];
        }
        level_modularity.push(q(&membership));
        current = current.aggregate(&local, communities);
    }
    let partition = Partition::from_labels(&membership).with_resolution(resolution);
    Ok(LouvainTrace { partition, level_modularity })
}

/// Local moving on one level. Returns dense community ids and whether any
/// node changed community.
fn one_level(graph: &WeightedGraph, resolution: f64, rng: &mut impl rand::Rng) -> (Vec<usize>, bool) {
    let n = graph.node_count();
    let two_m = graph.total_weight();
    let mut community: Vec<usize> = (0..n).collect();
    let mut totals: Vec<f64> = graph.degrees().to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut links = vec![0f64; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &v in &order {
            let own = community[v];
            let k_v = graph.degree(v);
            for &(w, a) in graph.neighbors(v) {
                if w == v {
                    continue;
                }
                let c = community[w];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                links[c] += a;
            }
            totals[own] -= k_v;
            let gain = |c: usize, links: &[f64]| links[c] - resolution * totals[c] * k_v / two_m;
            let stay = gain(own, &links);
            let mut best = own;
            let mut best_gain = stay;
            for &c in &touched {
                let g = gain(c, &links);
                if g > best_gain + GAIN_EPS {
                    best = c;
                    best_gain = g;
                }
            }
            totals[best] += k_v;
            if best != own {
                community[v] = best;
                moved = true;
            }
            for &c in &touched {
                links[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    let dense = Partition::from_labels(&community).assignment().to_vec();
    (dense, moved_any)
}
