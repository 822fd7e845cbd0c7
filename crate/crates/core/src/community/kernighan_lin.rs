//! Kernighan–Lin bisection.
//!
//! Starts from a seeded random balanced split and applies KL passes: tentatively
//! swap the best unlocked pair `(a, b)` by gain `D_a + D_b − 2 w_ab` until all
//! nodes are locked, then commit the prefix of swaps with the largest positive
//! cumulative gain. Odd node counts get a zero-degree ghost node that is
//! dropped from the result, so side sizes differ by at most one.

use rand::seq::SliceRandom;

use super::{CommunityError, Partition};
use crate::graph::WeightedGraph;

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionTrace {
    pub partition: Partition,
    /// Cut weight of the initial split and after every committed pass.
    pub cut_per_pass: Vec<f64>,
}

/// Total weight of edges whose endpoints lie in different communities.
pub fn cut_weight(graph: &WeightedGraph, partition: &Partition) -> f64 {
    graph
        .edges()
        .filter(|&(u, v, _)| partition.community(u) != partition.community(v))
        .map(|(_, _, w)| w)
        .sum()
}

pub fn kernighan_lin_bisect(graph: &WeightedGraph, seed: u64, max_passes: usize) -> Result<Partition, CommunityError> {
    Ok(kernighan_lin_trace(graph, seed, max_passes)?.partition)
}

pub fn kernighan_lin_trace(graph: &WeightedGraph, seed: u64, max_passes: usize) -> Result<BisectionTrace, CommunityError> {
    let real = graph.node_count();
    if real < 2 {
        return Err(CommunityError::TooFewNodes(real));
    }
    let n = real + real % 2;
    let mut w = vec![0f64; n * n];
    for (u, v, weight) in graph.edges() {
        if u != v {
            w[u * n + v] = weight;
            w[v * n + u] = weight;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut crate::seed::rng(seed));
    let mut side = vec![false; n];
    for &v in &order[n / 2..] {
        side[v] = true;
    }
    let cut = |side: &[bool]| -> f64 {
        let mut c = 0.0;
        for u in 0..n {
            for v in u + 1..n {
                if side[u] != side[v] {
                    c += w[u * n + v];
                }
            }
        }
        c
    };
    let mut cut_per_pass = vec![cut(&side)];

    for _ in 0..max_passes {
        let mut d: Vec<f64> = (0..n)
            .map(|v| (0..n).map(|u| if side[u] == side[v] { -w[v * n + u] } else { w[v * n + u] }).sum())
            .collect();
        let mut locked = vec![false; n];
        let mut swaps = Vec::with_capacity(n / 2);
        let mut gains = Vec::with_capacity(n / 2);
        for _ in 0..n / 2 {
            let ranked = |want: bool, d: &[f64], locked: &[bool]| {
                let mut ids: Vec<usize> = (0..n).filter(|&v| side[v] == want && !locked[v]).collect();
                ids.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
                ids
            };
            let left = ranked(false, &d, &locked);
            let right = ranked(true, &d, &locked);
            let mut best: Option<(f64, usize, usize)> = None;
            'outer: for &a in &left {
                for &b in &right {
                    let bound = d[a] + d[b];
                    if best.is_some_and(|(g, _, _)| bound <= g) {
                        if b == right[0] {
                            break 'outer;
                        }
                        break;
                    }
                    let g = bound - 2.0 * w[a * n + b];
                    if best.is_none_or(|(bg, _, _)| g > bg) {
                        best = Some((g, a, b));
                    }
                }
            }
            let (g, a, b) = best.expect("both sides keep unlocked nodes");
            locked[a] = true;
            locked[b] = true;
            for x in 0..n {
                if locked[x] {
                    continue;
                }
                let delta = 2.0 * (w[x * n + a] - w[x * n + b]);
                d[x] += if side[x] == side[a] { delta } else { -delta };
            }
            swaps.push((a, b));
            gains.push(g);
        }
        let mut best_k = 0;
        let mut best_sum = 0.0;
        let mut running = 0.0;
        for (k, g) in gains.iter().enumerate() {
            running += g;
            if running > best_sum + GAIN_EPS {
                best_sum = running;
                best_k = k + 1;
            }
        }
        if best_k == 0 {
            break;
        }
        for &(a, b) in &swaps[..best_k] {
            side[a] = true;
            side[b] = false;
        }
        cut_per_pass.push(cut(&side));
    }
    let labels: Vec<usize> = side[..real].iter().map(|&s| usize::from(s)).collect();
    Ok(BisectionTrace { partition: Partition::from_labels(&labels), cut_per_pass })
}
