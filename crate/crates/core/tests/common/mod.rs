//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use neurograph::mlp::{Mode, Model};
use neurograph::seed::rng;
use neurograph::{Cover, Partition, WeightedGraph};
use ndarray::Array2;

/// Dense symmetric matrix with a zero diagonal.
pub fn dense(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        if u != v {
            a[u][v] += w;
            a[v][u] += w;
        }
    }
    a
}

pub fn graph(a: &[Vec<f64>]) -> WeightedGraph {
    let n = a.len();
    let edges: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| a[u][v] > 0.0).map(|(u, v)| (u, v, a[u][v])).collect();
    WeightedGraph::from_edges(n, edges)
}

fn degrees(a: &[Vec<f64>]) -> Vec<f64> {
    a.iter().map(|r| r.iter().sum()).collect()
}

/// `1/2m * sum over ordered pairs (v, w) in the same community of
/// A_vw - gamma k_v k_w / 2m`.
pub fn naive_modularity(a: &[Vec<f64>], labels: &[usize], gamma: f64) -> f64 {
    let k = degrees(a);
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for v in 0..a.len() {
        for w in 0..a.len() {
            if labels[v] == labels[w] {
                q += a[v][w] - gamma * k[v] * k[w] / two_m;
            }
        }
    }
    q / two_m
}

/// Overlapping modularity on the binarized graph with `1 / (O_v O_w)` weights.
pub fn naive_unweighted_overlap(a: &[Vec<f64>], cover: &[Vec<usize>]) -> f64 {
    let n = a.len();
    let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect()).collect();
    let k = degrees(&b);
    let two_m: f64 = k.iter().sum();
    let o: Vec<f64> = (0..n).map(|v| cover.iter().filter(|c| c.contains(&v)).count() as f64).collect();
    let mut q = 0.0;
    for c in cover {
        for &v in c {
            for &w in c {
                q += (b[v][w] - k[v] * k[w] / two_m) / (o[v] * o[w]);
            }
        }
    }
    q / two_m
}

/// `alpha[c][v]`: share of v's weight into community c among v's communities.
pub fn naive_belonging(a: &[Vec<f64>], cover: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let into = |c: &Vec<usize>, v: usize| -> f64 { c.iter().map(|&w| a[v][w]).sum() };
    (0..cover.len())
        .map(|ci| {
            (0..n)
                .map(|v| {
                    if !cover[ci].contains(&v) {
                        return 0.0;
                    }
                    let mine: Vec<&Vec<usize>> = cover.iter().filter(|c| c.contains(&v)).collect();
                    let total: f64 = mine.iter().map(|c| into(c, v)).sum();
                    if total == 0.0 {
                        1.0 / mine.len() as f64
                    } else {
                        into(&cover[ci], v) / total
                    }
                })
                .collect()
        })
        .collect()
}

/// Weighted overlapping modularity with belonging coefficients.
pub fn naive_weighted_overlap(a: &[Vec<f64>], cover: &[Vec<usize>]) -> f64 {
    let k = degrees(a);
    let two_m: f64 = k.iter().sum();
    let alpha = naive_belonging(a, cover);
    let mut q = 0.0;
    for (ci, c) in cover.iter().enumerate() {
        for &v in c {
            for &w in c {
                let beta = alpha[ci][v] * alpha[ci][w];
                q += beta * a[v][w] - beta * k[v] * k[w] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as a restricted-growth label vector.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(labels: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            if labels.is_empty() && l > 0 {
                break;
            }
            labels.push(l);
            rec(labels, max.max(l), n, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(&mut Vec::with_capacity(n), 0, n, &mut out);
    }
    out
}

/// Maximum modularity over all partitions and one partition reaching it.
pub fn exhaustive_best(a: &[Vec<f64>], gamma: f64) -> (f64, Vec<usize>) {
    all_partitions(a.len())
        .into_iter()
        .map(|p| (naive_modularity(a, &p, gamma), p))
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cand| if cand.0 > best.0 + 1e-12 { cand } else { best })
}

pub fn same_grouping(a: &[usize], b: &[usize]) -> bool {
    Partition::from_labels(a).assignment() == Partition::from_labels(b).assignment()
}

pub fn cover_sets(cover: &Cover) -> Vec<Vec<usize>> {
    cover.communities().to_vec()
}

/// Largest relative error between backprop and central differences over
/// every parameter. `seed` fixes the dropout mask when `train` is set.
pub fn gradient_check(model: &Model, x: &Array2<f64>, labels: &[u32], eps: f64, train: Option<u64>) -> f64 {
    let loss_of = |m: &Model| -> f64 {
        match train {
            Some(s) => m.loss_and_gradients(x.view(), labels, Mode::Train(&mut rng(s))).unwrap().0,
            None => m.loss(x.view(), labels).unwrap(),
        }
    };
    let grads = match train {
        Some(s) => model.loss_and_gradients(x.view(), labels, Mode::Train(&mut rng(s))).unwrap().1,
        None => model.loss_and_gradients(x.view(), labels, Mode::Eval).unwrap().1,
    };
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for l in 0..model.layers().len() {
        let n_w = model.layers()[l].weights.len();
        let n_b = model.layers()[l].bias.len();
        for i in 0..n_w + n_b {
            let orig = param(&mut probe, l, i, None);
            param(&mut probe, l, i, Some(orig + eps));
            let up = loss_of(&probe);
            param(&mut probe, l, i, Some(orig - eps));
            let down = loss_of(&probe);
            param(&mut probe, l, i, Some(orig));
            let numeric = (up - down) / (2.0 * eps);
            let analytic = if i < n_w { grads.layers[l].weights.as_slice().unwrap()[i] } else { grads.layers[l].bias[i - n_w] };
            let rel = (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

/// Reads parameter `i` of layer `l` (weights row-major, then bias),
/// optionally overwriting it. Returns the previous value.
fn param(m: &mut Model, l: usize, i: usize, set: Option<f64>) -> f64 {
    let layer = &mut m.layers_mut()[l];
    let n_w = layer.weights.len();
    let slot = if i < n_w { &mut layer.weights.as_slice_mut().unwrap()[i] } else { &mut layer.bias[i - n_w] };
    let old = *slot;
    if let Some(v) = set {
        *slot = v;
    }
    old
}
